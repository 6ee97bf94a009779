//! Crate-wide error type.

use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A byte window did not match the configured n-gram length.
    #[error("window length mismatch: expected {expected} bytes, got {actual}")]
    WindowLength { expected: usize, actual: usize },

    /// A configuration value violates one of its constraints.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument violates an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A document changed between the two extraction passes.
    #[error("corpus changed between passes: {0}")]
    CorpusChanged(String),

    /// The corpus exceeds the exact-counting oracle's size guard.
    #[error("corpus too large for exact counting: {windows} windows exceeds guard of {limit}")]
    OracleGuard { windows: u64, limit: u64 },

    /// Metrics over an empty negative-label set are undefined.
    #[error("no negative-label documents: false-positive rate is undefined")]
    NoNegatives,

    /// Metrics over an empty positive-label set are undefined.
    #[error("no positive-label documents: recall is undefined")]
    NoPositives,

    /// A file could not be read or written.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A file exists but does not parse as the expected format.
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
