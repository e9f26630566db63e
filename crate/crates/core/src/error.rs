use thiserror::Error;

/// Errors produced by the beamforming library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input data violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation was called on an object in the wrong state, e.g. asking
    /// for multipliers of a solution that is not optimal.
    #[error("invalid state: {0}")]
    State(String),

    /// The interior-point solver stopped without certifying a result.
    #[error("numerical failure after {iterations} iterations (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e}, gap {gap:.3e})")]
    NumericalFailure { iterations: usize, primal_residual: f64, dual_residual: f64, gap: f64 },

    /// Malformed configuration or dump file.
    #[error("parse error: {0}")]
    Parse(String),

    /// A sampling loop exceeded its iteration bound.
    #[error("internal fault: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
