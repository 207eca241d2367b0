//! Error type shared by every module in the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter violates a documented precondition.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// An operation that requires data received none (empty cloud, mesh, trajectory...).
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Input data violates a structural invariant (non-finite coordinate, bad index...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A parse error in a text file, with 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A point fell outside the splatting grid.
    #[error("point {index} lies outside the grid support")]
    PointOutsideGrid { index: usize },

    /// The conjugate-gradient solve hit its iteration cap.
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDidNotConverge { residual: f64, iterations: usize },

    /// ICP could not establish enough correspondences.
    #[error("not enough correspondences: {found} found, {required} required")]
    InsufficientCorrespondences { found: usize, required: usize },

    /// Trajectory association produced too few matched frames.
    #[error("not enough matched frames: {found} found, {required} required")]
    InsufficientMatches { found: usize, required: usize },

    /// Surface sampling found no sample where both surfaces are hit.
    #[error("no valid samples: {0}")]
    NoValidSamples(&'static str),

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid_parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
