use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),

    #[error("unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("index is still in build mode; commit it first")]
    NotCommitted,

    #[error("index is committed and no longer accepts documents")]
    AlreadyCommitted,

    #[error("unsupported index format version {found} (this build reads version {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    #[error("analyzer mismatch: expected fingerprint {expected}, index has {found}")]
    AnalyzerMismatch { expected: String, found: String },

    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("{source_name}:{line}: {message}")]
    Line {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown query id `{0}`")]
    UnknownQuery(String),

    #[error("unbalanced braces in {0}")]
    UnbalancedBraces(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at_line(source_name: impl Into<String>, line: usize, message: impl ToString) -> Self {
        Error::Line {
            source_name: source_name.into(),
            line,
            message: message.to_string(),
        }
    }
}
