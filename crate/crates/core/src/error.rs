use thiserror::Error;

/// Errors surfaced by the library. Variants map onto CLI exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("node budget exceeded: {0}")]
    Budget(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("placement error: {0}")]
    Placement(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
