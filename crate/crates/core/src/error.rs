//! Error type shared across the harness.

use std::io;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, IttaError>;

#[derive(Debug, Error)]
pub enum IttaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("empty input")]
    EmptyInput,

    #[error("class registry is empty")]
    EmptyRegistry,

    #[error("sample has no patch grid")]
    MissingPatches,

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("state error: {0}")]
    State(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("stream contains no samples")]
    EmptyStream,

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl IttaError {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        IttaError::Format(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        IttaError::Config(msg.into())
    }
}
