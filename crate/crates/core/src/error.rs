use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CacError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space exceeds the configured cap of {cap} states")]
    ResourceLimit { cap: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("training diverged at epoch {epoch}: {reason}")]
    TrainingFailure { epoch: usize, reason: String },

    #[error("malformed parameter file (line {line}): {reason}")]
    ParamFormat { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, CacError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CacError {
    CacError::InvalidParameter(msg.into())
}
