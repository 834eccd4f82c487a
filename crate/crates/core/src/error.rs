//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the callee's documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed-form value failed an internal consistency requirement
    /// (e.g. a multiplicity formula produced a non-integer).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    /// A requested computation exceeds the configured size ceiling.
    #[error("size ceiling exceeded: {0}")]
    TooLarge(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
