//! Chain-structured convex estimation by ADMM.
//!
//! Problems of the form
//!
//! ```text
//! minimize   Σ_{i=1}^{N} Φ_i(x_i) + Σ_{i=1}^{N-1} Ψ_i(x_{i+1} - x_i)
//! ```
//!
//! are split into a block-separable prox step, an exact `O(N d)` projection
//! onto the chain-difference subspace, and a dual update. Ready-made
//! problems cover ℓ1 mean filtering (fused lasso / fused group lasso) and
//! ℓ1 variance filtering in the precision parametrization.
//!
//! See the `examples/` directory of this crate for one runnable program
//! per capability.

pub mod admm;
pub mod cli;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod projection;
pub mod prox;
pub mod synth;

pub use admm::{
    residuals, solve, AdmmState, BlockProx, ChainProblem, IterationRecord, Residuals, SolverConfig, SolverReport,
};
pub use error::{Error, Result};
pub use filters::{
    block_spread, default_segment_tol, lambda_max_mean, lambda_max_variance, mean_filter, mean_objective, mean_problem,
    segments, variance_filter, variance_problem, MeanFilterSpec, Penalty, Segment, TimeSeries, VarianceEstimate,
    VarianceFilterSpec,
};
pub use linalg::{spd_factor, spd_solve, sym_eig, EigenDecomposition, SpdFactor, SymMatrix};
pub use projection::{chain_factor, project, BlockVector, ChainCholesky};
pub use prox::{
    prox_gaussian, prox_neg_logdet, prox_neg_logdet_cov, soft_threshold_group, soft_threshold_scalar, GaussianProxCache,
};
