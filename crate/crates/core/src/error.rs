use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no valid documents in {0}")]
    EmptyCorpus(PathBuf),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vocabularies do not intersect; alignment impossible")]
    EmptyIntersection,

    #[error("infinite divergence: P({0}) > 0 but reference probability is 0")]
    InfiniteDivergence(String),

    #[error("correlation undefined for a constant series")]
    UndefinedCorrelation,

    #[error("'{word}' is not in the vocabulary (closest spellings: {})", .suggestions.join(", "))]
    OutOfVocabulary {
        word: String,
        suggestions: Vec<String>,
    },

    #[error("period {0} is not available")]
    MissingPeriod(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    WouldOverwrite(PathBuf),

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 2 usage, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::WouldOverwrite(_) => 2,
            Error::Numeric(_) | Error::UndefinedCorrelation | Error::InfiniteDivergence(_) => 4,
            _ => 3,
        }
    }
}
