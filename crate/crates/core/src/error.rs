use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DsmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DsmError {
    /// An argument lies outside the domain of a mathematical function or field.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical setting (resolution, truncation order, grid step) is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Mismatched call arguments, e.g. inner product of unequal lengths.
    #[error("usage error: {0}")]
    Usage(String),

    /// Data carrying no information (all-zero S-parameters).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DsmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DsmError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        DsmError::Parse { path: path.into(), message: message.into() }
    }
}
