use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),

    /// A model, lexicon record or configuration broke one of its invariants.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error(
        "{rejected} of {total} lexicon lines rejected (first: line {first_line}: {first_reason}); \
         is the morpheme separator right?"
    )]
    TooManyRejections {
        rejected: usize,
        total: usize,
        first_line: usize,
        first_reason: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("token id {0} out of range")]
    IdOutOfRange(u32),

    #[error("metric undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
