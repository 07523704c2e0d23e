use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Input data failed validation; `index` names the offending entry.
    #[error("validation failed at ({}, {}): {reason}", index.0, index.1)]
    Validation { index: (usize, usize), reason: String },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// Cached optimizer state disagrees with a fresh recomputation.
    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("graph is disconnected: {components} components")]
    Disconnected { components: usize },

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
