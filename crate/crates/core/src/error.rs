use std::io;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum SongError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyData,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("non-finite value in model state ({0})")]
    NonFiniteState(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("model file version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = SongError> = std::result::Result<T, E>;
