use thiserror::Error;

/// Errors raised by estimators, oracles and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} has value {value}, outside [0,1)")]
    OutOfDomain { index: usize, value: f64 },

    #[error("non-finite function value {value} at point {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("dimension {dim} is too large: {reason}")]
    TooLarge { dim: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("subset lattice is not downward closed; missing {}", .missing.join(", "))]
    IncompleteLattice { missing: Vec<String> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("external evaluator: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
