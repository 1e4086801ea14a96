use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("dimension mismatch for {field}: expected {expected}, got {got}")]
    Dimension {
        field: &'static str,
        expected: String,
        got: String,
    },

    #[error("coordinate outside support: {0}")]
    OutOfSupport(String),

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("malformed sidecar field `{field}`: {reason}")]
    Sidecar { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(field: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            field,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NonFinite(_) | Error::Io(_))
    }
}
