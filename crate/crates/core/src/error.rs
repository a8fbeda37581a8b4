use thiserror::Error;

/// Errors raised by the workbench.
///
/// Every variant is a domain condition the caller can act on; none of them
/// hides a partially computed answer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A kneading map or sequence was queried past what it can answer.
    #[error("horizon exceeded: {what} needs index {needed}, available up to {available}")]
    Horizon {
        what: String,
        needed: String,
        available: String,
    },
    /// Input violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// The input describes an invalid object (spec, tree, word).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A carry/borrow or path successor escaped the finite window.
    #[error("unresolved within window of length {window}: {detail}")]
    Unresolved { window: usize, detail: String },
    /// An explicit (dense) representation would be too large.
    #[error("too large for an explicit representation: {0}")]
    TooLarge(String),
    /// Floating point work lost the information needed for a verdict.
    #[error("precision error: {0}")]
    Precision(String),
    /// Parameter search did not find a match.
    #[error("not found: {0}")]
    NotFound(String),
    /// Extracted combinatorics are inconsistent with kneading theory.
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn horizon(
        what: impl Into<String>,
        needed: impl ToString,
        available: impl ToString,
    ) -> Self {
        Error::Horizon {
            what: what.into(),
            needed: needed.to_string(),
            available: available.to_string(),
        }
    }

    /// Short machine-readable tag used by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Horizon { .. } => "horizon",
            Error::Domain(_) => "domain",
            Error::Invalid(_) => "invalid",
            Error::Unresolved { .. } => "unresolved",
            Error::TooLarge(_) => "too_large",
            Error::Precision(_) => "precision",
            Error::NotFound(_) => "not_found",
            Error::Inconsistent(_) => "inconsistent",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
