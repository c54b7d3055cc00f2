use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("row {row}: unknown label `{label}`")]
    UnknownLabel { row: usize, label: String },

    #[error("row {row}: ratios sum to {sum}, expected 1")]
    RatioSum { row: usize, sum: f64 },

    #[error("row {row}: non-finite value in column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid label space: {0}")]
    LabelSpace(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate training set: {0}")]
    Degenerate(String),

    #[error("label `{0}` has no positive training examples")]
    NoPositiveExamples(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("every grid point failed to train: {0}")]
    GridExhausted(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool: 1 usage, 2 data, 3 training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 1,
            Error::Degenerate(_) | Error::NoPositiveExamples(_) | Error::GridExhausted(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
