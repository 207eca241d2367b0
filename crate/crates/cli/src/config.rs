//! Pipeline config files: flat `key = value` lines with `#` comments.
//! Unknown keys are rejected by name so typos cannot silently fall back to
//! defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};
use depthforge_core::pipeline::PipelineParams;
use depthforge_core::poisson::PoissonParams;

const KNOWN_KEYS: &[&str] = &[
    "input",
    "trajectory",
    "output",
    "report",
    "intermediates_dir",
    "radius",
    "min_neighbors",
    "voxel_size",
    "normals_k",
    "mls_degree",
    "mls_bandwidth",
    "mls_k",
    "resolution",
    "padding",
    "gt_mesh",
    "gt_traj",
    "rmsd_grid",
    "distance_bins",
    "seed",
    "threads",
];

/// Maximum marching-cubes resolution the CLI accepts.
pub const MAX_RESOLUTION: usize = 192;

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub trajectory: Option<PathBuf>,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
    pub intermediates_dir: Option<PathBuf>,
    pub radius: Option<f64>,
    pub min_neighbors: Option<usize>,
    pub voxel_size: Option<f64>,
    pub normals_k: Option<usize>,
    pub mls_degree: Option<usize>,
    pub mls_bandwidth: Option<f64>,
    pub mls_k: Option<usize>,
    pub resolution: Option<usize>,
    pub padding: Option<usize>,
    pub gt_mesh: Option<PathBuf>,
    pub gt_traj: Option<PathBuf>,
    pub rmsd_grid: (usize, usize),
    pub distance_bins: usize,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    origin.display(),
                    idx + 1
                ))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!(
                    "{}:{}: unknown key `{key}`",
                    origin.display(),
                    idx + 1
                )));
            }
            if entries
                .insert(key.clone(), (idx + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(CliError::config(format!(
                    "{}:{}: duplicate key `{key}`",
                    origin.display(),
                    idx + 1
                )));
            }
        }

        let mut cfg = PipelineConfig {
            rmsd_grid: (200, 200),
            distance_bins: 32,
            ..Default::default()
        };
        let get = |key: &str| entries.get(key).map(|(_, v)| v.as_str());
        let parse_num = |key: &str| -> CliResult<Option<f64>> {
            get(key)
                .filter(|v| !v.is_empty() && *v != "auto")
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::config(format!("key `{key}`: invalid number `{v}`")))
                })
                .transpose()
        };
        let parse_usize = |key: &str| -> CliResult<Option<usize>> {
            get(key)
                .filter(|v| !v.is_empty() && *v != "auto")
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| CliError::config(format!("key `{key}`: invalid integer `{v}`")))
                })
                .transpose()
        };

        cfg.input = get("input")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .ok_or_else(|| CliError::config("config is missing required key `input`"))?;
        cfg.output = get("output")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .ok_or_else(|| CliError::config("config is missing required key `output`"))?;
        cfg.trajectory = get("trajectory").filter(|v| !v.is_empty()).map(PathBuf::from);
        cfg.report = get("report").filter(|v| !v.is_empty()).map(PathBuf::from);
        cfg.intermediates_dir = get("intermediates_dir")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        cfg.gt_mesh = get("gt_mesh").filter(|v| !v.is_empty()).map(PathBuf::from);
        cfg.gt_traj = get("gt_traj").filter(|v| !v.is_empty()).map(PathBuf::from);

        cfg.radius = parse_num("radius")?;
        cfg.voxel_size = parse_num("voxel_size")?;
        cfg.mls_bandwidth = parse_num("mls_bandwidth")?;
        cfg.min_neighbors = parse_usize("min_neighbors")?;
        cfg.normals_k = parse_usize("normals_k")?;
        cfg.mls_degree = parse_usize("mls_degree")?;
        cfg.mls_k = parse_usize("mls_k")?;
        cfg.resolution = parse_usize("resolution")?;
        cfg.padding = parse_usize("padding")?;
        cfg.distance_bins = parse_usize("distance_bins")?.unwrap_or(32);
        cfg.seed = parse_usize("seed")?.map(|v| v as u64);
        cfg.threads = parse_usize("threads")?;

        if let Some(grid) = get("rmsd_grid").filter(|v| !v.is_empty()) {
            cfg.rmsd_grid = parse_grid(grid)?;
        }
        if let Some(r) = cfg.resolution {
            if r > MAX_RESOLUTION {
                return Err(CliError::config(format!(
                    "key `resolution`: {r} exceeds the maximum {MAX_RESOLUTION}"
                )));
            }
        }
        Ok(cfg)
    }

    pub fn to_pipeline_params(&self) -> PipelineParams<f64> {
        let default = PipelineParams::<f64>::default();
        let poisson_default = PoissonParams::default();
        PipelineParams {
            radius: self.radius,
            min_neighbors: self.min_neighbors.unwrap_or(default.min_neighbors),
            voxel_size: self.voxel_size,
            normals_k: self.normals_k.unwrap_or(default.normals_k),
            mls_degree: self.mls_degree.unwrap_or(default.mls_degree),
            mls_bandwidth: self.mls_bandwidth,
            mls_k: self.mls_k.unwrap_or(default.mls_k),
            poisson: PoissonParams {
                resolution: self.resolution.unwrap_or(poisson_default.resolution),
                padding: self.padding.unwrap_or(poisson_default.padding),
            },
        }
    }
}

/// Parses `MxN` grid sizes as used by `--grid` and `rmsd_grid`.
pub fn parse_grid(text: &str) -> CliResult<(usize, usize)> {
    let (m, n) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::config(format!("grid must look like 200x200, got `{text}`")))?;
    let m = m
        .trim()
        .parse::<usize>()
        .map_err(|_| CliError::config(format!("invalid grid dimension `{m}`")))?;
    let n = n
        .trim()
        .parse::<usize>()
        .map_err(|_| CliError::config(format!("invalid grid dimension `{n}`")))?;
    if m == 0 || n == 0 {
        return Err(CliError::config("grid dimensions must be at least 1"));
    }
    Ok((m, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = PipelineConfig::parse(
            "input = in.ply\noutput = out.ply\n# comment\nresolution = 96\n",
            Path::new("test.cfg"),
        )
        .unwrap();
        assert_eq!(cfg.input, PathBuf::from("in.ply"));
        assert_eq!(cfg.resolution, Some(96));
        assert_eq!(cfg.rmsd_grid, (200, 200));
    }

    #[test]
    fn rejects_unknown_key_by_name() {
        let err = PipelineConfig::parse(
            "input = a\noutput = b\nvoxell_size = 3\n",
            Path::new("test.cfg"),
        )
        .unwrap_err();
        assert_eq!(err.code, crate::exit_codes::CONFIG);
        assert!(err.message.contains("voxell_size"), "{}", err.message);
    }

    #[test]
    fn rejects_oversized_resolution_and_bad_grid() {
        let err = PipelineConfig::parse(
            "input = a\noutput = b\nresolution = 300\n",
            Path::new("t.cfg"),
        )
        .unwrap_err();
        assert!(err.message.contains("192"));
        assert!(parse_grid("200by200").is_err());
        assert_eq!(parse_grid("120x80").unwrap(), (120, 80));
    }

    #[test]
    fn auto_and_empty_values_mean_default() {
        let cfg = PipelineConfig::parse(
            "input = a\noutput = b\nradius = auto\nmls_bandwidth =\n",
            Path::new("t.cfg"),
        )
        .unwrap();
        assert_eq!(cfg.radius, None);
        assert_eq!(cfg.mls_bandwidth, None);
    }
}
