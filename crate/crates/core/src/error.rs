use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the facies inversion engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid grid dimensions: {0}")]
    InvalidDims(String),

    #[error("payload holds {actual} cells but dims declare {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown facies code {code} at cell {index}")]
    UnknownFacies { code: i64, index: usize },

    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing property table entry for facies {0}")]
    MissingFacies(u8),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
