use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn embedding(msg: impl Into<String>) -> Self {
        Error::Embedding(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
