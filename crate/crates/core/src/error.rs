use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised while ingesting, binding, searching or persisting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("dependency references unknown type id {id} ({location})")]
    UnknownNode { id: u64, location: String },

    #[error("pin #{index} (`{pattern}`) matches no type or package")]
    UnboundPin { index: usize, pattern: String },

    #[error("pin #{index} (`{pattern}`) targets {what} outside the model")]
    PinOutOfRange {
        index: usize,
        pattern: String,
        what: String,
    },

    #[error("conflicting pins: #{first} (`{first_pattern}`) and #{second} (`{second_pattern}`) assign {subject} differently")]
    PinConflict {
        first: usize,
        first_pattern: String,
        second: usize,
        second_pattern: String,
        subject: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("corrupt result store at {path}: {message}")]
    CorruptStore { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
