//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by density evaluation, sampling, fitting and post-processing.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model parameters violate a structural constraint (e.g., a bivariate
    /// wrapped normal precision matrix that is not positive semidefinite).
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The input is degenerate for the requested statistic (zero resultant,
    /// zero variance, all-zero densities, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Data dimension does not match the model family.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration value is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical procedure failed to produce a finite result.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
