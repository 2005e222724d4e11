use std::path::PathBuf;

/// Errors produced by the simulator and its numerical building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite input to {0}")]
    NonFiniteInput(&'static str),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension {0} is not a power of two")]
    BadDimension(usize),
    #[error("value {value} lies outside the domain [-{bound}, {bound}]")]
    OutOfDomain { value: f64, bound: f64 },
    #[error("greedy step requested before any global estimate was broadcast")]
    MissingBroadcast,
    #[error("aggregation round expected {expected} uploads for phase {phase}, got {got}")]
    IncompleteRound {
        phase: u32,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
