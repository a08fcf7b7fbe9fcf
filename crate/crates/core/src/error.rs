use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the training and inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate layer: every node of {0} was pruned")]
    DegenerateLayer(String),

    #[error("transform selection impossible: every candidate in the bag is degenerate")]
    SelectionImpossible,

    #[error("empty layer: no nodes to score")]
    EmptyLayer,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error in {path} at row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("label error: {0}")]
    Label(String),

    #[error("checksum mismatch: model container is corrupted")]
    Checksum,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures that originate in the numerics rather than in IO or usage.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::DegenerateLayer(_)
                | Error::SelectionImpossible
                | Error::EmptyLayer
        )
    }
}
