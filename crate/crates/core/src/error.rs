use thiserror::Error;

/// Errors produced by the analyses in this crate.
///
/// `Hypothesis` marks a mathematical precondition that the supplied data do
/// not meet (the analysis itself is sound); every other variant is a usage,
/// domain or numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: operator acts on {expected}, got vector of length {found}")]
    DimensionMismatch { expected: String, found: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series does not converge: {0}")]
    Divergence(String),

    #[error("unbounded-truncation: {0}")]
    UnboundedTruncation(String),

    #[error("unsupported operator combination: {0}")]
    Unsupported(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("parse error in field `{field}`: {reason}")]
    Parse { field: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error reports a failed mathematical hypothesis rather
    /// than a malformed request.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::Hypothesis(_) | Error::Divergence(_) | Error::Singular(_) | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
