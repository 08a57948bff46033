//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("model build error: {0}")]
    Build(String),

    #[error("unsupported feature for this conversion: {0}")]
    Unsupported(String),

    #[error("infeasible at stage {stage}: {reason}")]
    Infeasible { stage: usize, reason: String },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
