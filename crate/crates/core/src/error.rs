//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or dimension mismatch in a tensor operation. The message names
    /// the offending dimension.
    #[error("{op}: {msg}")]
    Shape { op: &'static str, msg: String },

    /// A binary file (checkpoint, density map, image) failed to parse.
    #[error("format error in {path}: {msg}")]
    Format { path: String, msg: String },

    /// An upstream artifact (checkpoint, split file, corpus file) is missing.
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    /// Invalid data fed to the pipeline (bad keypoint record, annotation
    /// outside the image, negative density cell, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Bad configuration value or unparsable config file.
    #[error("config error: {0}")]
    Config(String),

    /// Training precondition violated (missing gradient, bad schedule, ...).
    #[error("training error: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn shape(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Shape { op, msg: msg.into() }
    }

    pub fn format(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
