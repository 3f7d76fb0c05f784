use thiserror::Error;

/// Errors raised by parameter validation and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate distribution has no differential entropy")]
    DegenerateEntropy,

    #[error("action carries no private-signal information (kappa = 0)")]
    UninformativeAction,

    #[error("observation has zero likelihood under the announced strategy")]
    ZeroLikelihood,

    #[error("discrete (Shannon) entropy cannot be used as a differential entropy")]
    IncomparableEntropy,

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:e}); trace tail: {trace:?}")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        trace: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
