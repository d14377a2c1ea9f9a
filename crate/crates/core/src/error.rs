use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("series did not converge after {terms} terms")]
    Divergence { terms: usize },

    #[error("no contour separates the left and right pole sets: {0}")]
    ContourInseparable(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("result is not real: re = {re:e}, im = {im:e}")]
    NotReal { re: f64, im: f64 },

    #[error("moment fit is infeasible for N = {n_elements}: {reason}")]
    InfeasibleFit { n_elements: u32, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
