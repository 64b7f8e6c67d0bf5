use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes do not fit together (mismatched sizes, endpoints, non-commuting squares).
    #[error("structural error: {0}")]
    Structural(String),

    /// A candidate object or morphism violates a defining condition.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// An enumeration exceeded its configured size guard.
    #[error("resource guard tripped: {0}")]
    Resource(String),

    /// Malformed textual input (keys, JSON documents).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
