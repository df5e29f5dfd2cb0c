use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A rectangle or index reached outside the addressed object.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// Tensor or cube dimensions that do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Inconsistent configuration (pattern vs. cube, network config vs. params, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A filter-array pattern leaves a pixel with no sample of some band in reach.
    #[error("degenerate pattern: band {band} has no sample in reach of pixel (row {row}, col {col})")]
    DegeneratePattern { band: usize, row: usize, col: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// Malformed file contents.
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }
}
