//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the merging pipeline.
///
/// `Validation` covers rejected inputs (bad shapes, out-of-range
/// parameters, malformed files); `Numeric` covers failures detected during
/// computation (non-finite values, divergence); `Io` wraps filesystem and
/// serialization problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("numeric: {0}")]
    Numeric(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
