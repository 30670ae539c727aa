use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmrError {
    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input is well-formed but the statistic is undefined for it (e.g. zero trace).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EmrError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(EmrError::Domain(msg.into()))
}
