//! Shared error type.

use thiserror::Error;

use crate::schemes::SchemeId;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested scheme has no implementation for this operation.
    #[error("scheme {scheme} is not supported by {operation}")]
    UnsupportedScheme {
        scheme: SchemeId,
        operation: &'static str,
    },

    /// The request would exceed a hard resource cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A root bracket did not change sign. For the brackets used here this
    /// signals the violation of a certified inequality, not a tuning issue.
    #[error("no sign change while {context}: f({lo}) and f({hi}) have the same sign")]
    BracketFailure { context: String, lo: f64, hi: f64 },

    /// The brute-force argmin landed on the scan cap itself, meaning the cap
    /// truncated the search.
    #[error("brute-force argmin hit the scan cap n_max = {n_max}; raise the cap")]
    CapBinding { n_max: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
