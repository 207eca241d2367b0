//! Library behind the `depthforge` binary: argument types, config parsing,
//! report schema, and the command implementations. Kept as a library so the
//! acceptance suite can drive commands in process.

pub mod commands;
pub mod config;
pub mod report;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "depthforge",
    version,
    about = "Surface reconstruction and evaluation for sparse monocular-SLAM point clouds"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: hardware parallelism;
    /// env fallback DEPTHFORGE_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene: ground-truth mesh, orbit trajectory and a
    /// corrupted observation cloud.
    Synth(commands::synth::SynthArgs),
    /// Radius outlier removal followed by voxel-grid resampling.
    Filter(commands::filter::FilterArgs),
    /// Moving-least-squares smoothing of a point cloud.
    Mls(commands::mls::MlsArgs),
    /// Poisson indicator-function surface reconstruction.
    Poisson(commands::poisson::PoissonArgs),
    /// Run the full pipeline from a config file.
    Pipeline(commands::pipeline::PipelineArgs),
    /// Compare a reconstructed surface against a ground-truth mesh.
    EvalSurf(commands::eval_surf::EvalSurfArgs),
    /// Align an estimated trajectory to ground truth and report RMSE.
    EvalTraj(commands::eval_traj::EvalTrajArgs),
    /// Render a depth map of a mesh from a camera pose.
    Depth(commands::depth::DepthArgs),
    /// Run the whole ground-truth study end to end with a fixed seed.
    ReproduceStudy(commands::reproduce::ReproduceArgs),
}

/// Exit codes are a stable scripting contract.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const STAGE: i32 = 4;
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: exit_codes::CONFIG,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: exit_codes::IO,
            message: message.into(),
        }
    }

    pub fn stage(message: impl Into<String>) -> Self {
        Self {
            code: exit_codes::STAGE,
            message: message.into(),
        }
    }
}

impl From<depthforge_core::Error> for CliError {
    fn from(e: depthforge_core::Error) -> Self {
        use depthforge_core::Error as E;
        let code = match &e {
            E::InvalidParameter { .. } => exit_codes::CONFIG,
            E::Io { .. } | E::Parse { .. } => exit_codes::IO,
            E::Stage { source, .. } => match source.as_ref() {
                E::Io { .. } | E::Parse { .. } => exit_codes::IO,
                _ => exit_codes::STAGE,
            },
            _ => exit_codes::STAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Runs one parsed command; `main` maps the error to an exit code.
pub fn run(cli: Cli) -> CliResult {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Synth(args) => commands::synth::run(&args),
        Command::Filter(args) => commands::filter::run(&args),
        Command::Mls(args) => commands::mls::run(&args),
        Command::Poisson(args) => commands::poisson::run(&args),
        Command::Pipeline(args) => commands::pipeline::run(&args),
        Command::EvalSurf(args) => commands::eval_surf::run(&args),
        Command::EvalTraj(args) => commands::eval_traj::run(&args),
        Command::Depth(args) => commands::depth::run(&args),
        Command::ReproduceStudy(args) => commands::reproduce::run(&args),
    }
}

fn init_threads(flag: Option<usize>) -> CliResult {
    let from_env = std::env::var("DEPTHFORGE_THREADS")
        .ok()
        .map(|v| {
            v.parse::<usize>().map_err(|_| {
                CliError::config(format!("DEPTHFORGE_THREADS must be an integer, got `{v}`"))
            })
        })
        .transpose()?;
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        // A second init in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Writes a file, mapping failures to the I/O exit code.
pub(crate) fn write_file(path: &PathBuf, contents: &[u8]) -> CliResult {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
