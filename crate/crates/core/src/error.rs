use thiserror::Error;

/// Errors raised by every operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("problem size {n} exceeds the enumeration capacity {max_n}")]
    Capacity { n: usize, max_n: usize },

    #[error("unsupported disorder: {0}")]
    UnsupportedDisorder(String),

    #[error("online contract violated at column {t}: step returned {value}")]
    ContractViolation { t: usize, value: i8 },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("malformed instance file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
