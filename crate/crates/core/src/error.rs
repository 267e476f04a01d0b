use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments: out-of-range coordinates, mismatched geometries, empty series.
    #[error("invalid input: {0}")]
    Input(String),

    /// An operation called in a state where it is not defined.
    #[error("invalid usage: {0}")]
    Usage(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
