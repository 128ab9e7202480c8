//! Error type shared across the crate.

use thiserror::Error;

/// Failure modes surfaced by construction, propagation and analysis routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input state or matrix fails a structural requirement
    /// (hermiticity, trace, positivity, normalization).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The propagator left its validity envelope (trace drift or negativity
    /// beyond tolerance); results past this point are not trustworthy.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// A truncated expansion failed its convergence requirement.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// A linear-algebra routine could not complete (singular system,
    /// no eigenvalue convergence).
    #[error("linear algebra failure: {0}")]
    LinalgFailure(String),

    /// A fit or rate estimate is mathematically undefined on this input.
    #[error("undefined result: {0}")]
    UndefinedResult(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }

    pub(crate) fn integration(msg: impl Into<String>) -> Self {
        Error::IntegrationFailure(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>) -> Self {
        Error::ConvergenceFailure(msg.into())
    }

    pub(crate) fn undefined(msg: impl Into<String>) -> Self {
        Error::UndefinedResult(msg.into())
    }
}
