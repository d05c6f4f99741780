//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Numerically degenerate input (rank-deficient matrix, all-zero kernel mass).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two inputs that must agree in shape or provenance do not.
    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    /// File-level validation failure (missing ids, duplicates, bad schema).
    #[error("validation error: {0}")]
    Validation(String),

    /// Row- or record-level parse failure with its 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A computation produced a non-finite value.
    #[error("numeric failure: {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
