//! Error type shared across the pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GaitError {
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("empty output: {0}")]
    EmptyOutput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("class {class:?} has {count} members, stratification needs at least {required}")]
    Stratification {
        class: String,
        count: usize,
        required: usize,
    },

    #[error("invalid labels: {0}")]
    InvalidLabel(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl GaitError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        GaitError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, GaitError>;
