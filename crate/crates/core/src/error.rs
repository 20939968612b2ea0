use thiserror::Error;

/// Errors produced by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("{what} failed to converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("non-finite value from {map} prox at iteration {iteration}, block {block}")]
    NonFinite {
        map: &'static str,
        iteration: usize,
        block: usize,
    },

    #[error("problem appears unbounded below: {0}")]
    Unbounded(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
