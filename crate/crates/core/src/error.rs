use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building scenarios and running campaigns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid environment: {0}")]
    Environment(String),

    #[error("invalid codebook: {0}")]
    Codebook(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config error at line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("rejection sampling stalled: {0}")]
    Sampling(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for errors caused by the user's configuration rather than I/O.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
