//! Machine-readable run reports. The key schema is stable and documented in
//! the repository README; bump `schema_version` on breaking changes.

use serde::Serialize;
use serde_json::{Map, Value};
use std::path::PathBuf;

use crate::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct StageEntry {
    pub name: String,
    pub millis: f64,
    pub input_points: usize,
    pub output_points: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Effective parameter values after defaults were resolved.
    pub parameters: Map<String, Value>,
    /// Per-stage timings and point counts (timings vary across runs).
    pub stages: Vec<StageEntry>,
    /// Deterministic numeric results.
    pub metrics: Map<String, Value>,
    /// Paths written by the command.
    pub outputs: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: Map::new(),
            stages: Vec::new(),
            metrics: Map::new(),
            outputs: Map::new(),
            seed: None,
            failed_stage: None,
            error: None,
        }
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn set_metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn set_output(&mut self, key: &str, path: &std::path::Path) {
        self.outputs.insert(
            key.to_string(),
            Value::String(path.display().to_string()),
        );
    }

    pub fn write(&self, path: &PathBuf) -> CliResult {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::stage(format!("report serialization failed: {e}")))?;
        crate::write_file(path, json.as_bytes())
    }
}

/// f64 -> JSON number; non-finite values become strings so reports always
/// serialize.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{v}")))
}
