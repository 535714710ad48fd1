use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Every variant maps to a stable one-word category (see [`Error::category`])
/// so batch drivers can report machine-parsable failure classes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file; always names the offending line.
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Input violates a documented contract (shape, sign, labels, ranges).
    #[error("{0}")]
    Validation(String),

    #[error("word {0:?} not in vocabulary")]
    OutOfVocabulary(String),

    /// Artifacts built against different vocabularies must not be mixed.
    #[error("vocabulary fingerprint mismatch: {0}")]
    Fingerprint(String),

    /// A loss, gradient, or distance stopped being finite.
    #[error("{0}")]
    NonFinite(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Stable one-word category for machine-readable error reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::OutOfVocabulary(_) => "oov",
            Error::Fingerprint(_) => "fingerprint",
            Error::NonFinite(_) => "numeric",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
