use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::FileKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid identifier {value:?}: {reason}")]
    InvalidId { value: String, reason: &'static str },

    #[error("unknown IANA timezone {0:?}")]
    InvalidTimezone(String),

    #[error("invalid study configuration: {0}")]
    Config(String),

    #[error("{kind} file has an unexpected header: expected [{expected}], found [{found}]")]
    Header {
        kind: FileKind,
        expected: String,
        found: String,
    },

    #[error("unreadable {kind} file: {message}")]
    Malformed { kind: FileKind, message: String },

    #[error("{} is locked by another writer (remove the lock file if no process holds it)", path.display())]
    Locked { path: PathBuf },

    #[error("unknown table kind {0:?}")]
    UnknownTable(String),

    #[error("invalid bundle at {}: {reason}", path.display())]
    Bundle { path: PathBuf, reason: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Locked { .. })
    }
}
