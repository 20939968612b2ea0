//! ℓ1 mean filtering and ℓ1 variance filtering built on the chain ADMM
//! engine, plus `λ_max` and change-point segmentation helpers.

use std::fmt;
use std::str::FromStr;

use crate::admm::{solve, ChainProblem, SolverConfig, SolverReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::{spd_factor, sym_eig, SymMatrix};
use crate::projection::BlockVector;
use crate::prox::{group_threshold_into, prox_neg_logdet_cov, scalar_threshold_into, GaussianProxCache};

/// Observations `y_1, …, y_N`, one vector per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: BlockVector,
}

impl TimeSeries {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self {
            samples: BlockVector::new(rows)?,
        })
    }

    /// Scalar series (`dim = 1`).
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| vec![*v]).collect())
    }

    pub fn from_blocks(samples: BlockVector) -> Self {
        Self { samples }
    }

    pub fn n_samples(&self) -> usize {
        self.samples.n_blocks()
    }

    pub fn dim(&self) -> usize {
        self.samples.block_dim()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.samples.block(i)
    }

    pub fn samples(&self) -> &BlockVector {
        &self.samples
    }
}

/// Penalty on consecutive differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Penalty {
    /// `λ‖r_i‖₂` on the whole block (Frobenius norm for matrices).
    #[default]
    Group,
    /// `λ‖r_i‖₁`, componentwise.
    Elementwise,
}

impl Penalty {
    pub fn value(self, r: &[f64]) -> f64 {
        match self {
            Penalty::Group => r.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Penalty::Elementwise => r.iter().map(|v| v.abs()).sum(),
        }
    }

    /// Dual norm, used by the `λ_max` formulas.
    fn dual_norm(self, r: &[f64]) -> f64 {
        match self {
            Penalty::Group => r.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Penalty::Elementwise => r.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    fn threshold_into(self, a: &[f64], kappa: f64, out: &mut [f64]) {
        match self {
            Penalty::Group => group_threshold_into(a, kappa, out),
            Penalty::Elementwise => scalar_threshold_into(a, kappa, out),
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" | "frobenius" => Ok(Penalty::Group),
            "elementwise" => Ok(Penalty::Elementwise),
            other => Err(invalid(format!(
                "unknown penalty '{other}' (expected group, frobenius or elementwise)"
            ))),
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::Group => "group",
            Penalty::Elementwise => "elementwise",
        })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be nonnegative and finite, got {lambda}")))
    }
}

/// `ρ` used when the config does not fix one: `λ` if positive, else 1.
fn default_rho(config: &SolverConfig, lambda: f64) -> f64 {
    config.rho.unwrap_or(if lambda > 0.0 { lambda } else { 1.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFilterSpec {
    pub lambda: f64,
    pub penalty: Penalty,
    /// Known noise covariance `Σ` (SPD).
    pub sigma: SymMatrix,
}

impl MeanFilterSpec {
    /// Group penalty with `Σ = I`.
    pub fn new(lambda: f64, dim: usize) -> Self {
        Self {
            lambda,
            penalty: Penalty::Group,
            sigma: SymMatrix::identity(dim),
        }
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_sigma(mut self, sigma: SymMatrix) -> Self {
        self.sigma = sigma;
        self
    }
}

/// Mean-filter objective `Σ ½(y_i - x_i)ᵀΣ⁻¹(y_i - x_i) + λ Σ pen(x_{i+1} - x_i)`.
pub fn mean_objective(data: &TimeSeries, spec: &MeanFilterSpec, x: &BlockVector) -> Result<f64> {
    let sigma_inv = spd_factor(&spec.sigma)?.inverse();
    Ok(mean_objective_with(
        data,
        &sigma_inv,
        spec.lambda,
        spec.penalty,
        x,
        &x.differences(),
    ))
}

fn mean_objective_with(
    data: &TimeSeries,
    sigma_inv: &SymMatrix,
    lambda: f64,
    penalty: Penalty,
    x: &BlockVector,
    r: &BlockVector,
) -> f64 {
    let mut fit = 0.0;
    let mut resid = vec![0.0; data.dim()];
    for (i, xi) in x.blocks().enumerate() {
        for (e, (a, b)) in resid.iter_mut().zip(data.sample(i).iter().zip(xi)) {
            *e = a - b;
        }
        let mut q = 0.0;
        for (j, ej) in resid.iter().enumerate() {
            q += ej * (0..resid.len()).map(|k| sigma_inv.get(j, k) * resid[k]).sum::<f64>();
        }
        fit += 0.5 * q;
    }
    fit + lambda * r.blocks().map(|ri| penalty.value(ri)).sum::<f64>()
}

/// Builds the mean-filtering chain problem for a fixed `ρ`.
pub fn mean_problem(data: &TimeSeries, spec: &MeanFilterSpec, rho: f64) -> Result<ChainProblem> {
    check_lambda(spec.lambda)?;
    if spec.sigma.dim() != data.dim() {
        return Err(invalid(format!(
            "covariance is {0}x{0} but the series has dimension {1}",
            spec.sigma.dim(),
            data.dim()
        )));
    }
    let cache = GaussianProxCache::new(&spec.sigma, data.samples(), rho)?;
    let sigma_inv = spd_factor(&spec.sigma)?.inverse();
    let lambda = spec.lambda;
    let penalty = spec.penalty;

    let phi = move |i: usize, target: &[f64], rho_now: f64, out: &mut [f64]| {
        if rho_now != cache.rho() {
            return Err(invalid("mean-filter prox was built for a different rho"));
        }
        cache.prox_into(i, target, out)
    };
    let psi = move |_: usize, target: &[f64], rho_now: f64, out: &mut [f64]| {
        penalty.threshold_into(target, lambda / rho_now, out);
        Ok(())
    };
    let series = data.clone();
    Ok(ChainProblem::new(data.n_samples(), data.dim(), phi, psi)?
        .with_penalty_weight(lambda)
        .with_objective(move |x, r| mean_objective_with(&series, &sigma_inv, lambda, penalty, x, r)))
}

/// Piecewise-constant mean estimation. Returns the estimated means and the
/// solver report.
pub fn mean_filter(
    data: &TimeSeries,
    spec: &MeanFilterSpec,
    config: &SolverConfig,
) -> Result<(BlockVector, SolverReport)> {
    let rho = default_rho(config, spec.lambda);
    let problem = mean_problem(data, spec, rho)?;
    let config = SolverConfig {
        rho: Some(rho),
        ..config.clone()
    };
    let report = solve(&problem, &config, None)?;
    Ok((report.x_star.clone(), report))
}

/// Smallest `λ` for which the mean-filter solution is constant.
///
/// With `P_k = Σ_{j≤k} Σ⁻¹(y_j - ȳ)`, this is `max_k ‖P_k‖₂` for the group
/// penalty and `max_k ‖P_k‖_∞` for the elementwise one.
pub fn lambda_max_mean(data: &TimeSeries, sigma: &SymMatrix, penalty: Penalty) -> Result<f64> {
    let n = data.n_samples();
    if n < 2 {
        return Err(invalid("lambda_max needs at least 2 samples"));
    }
    if sigma.dim() != data.dim() {
        return Err(invalid("covariance dimension does not match the series"));
    }
    let sigma_inv = spd_factor(sigma)?.inverse();
    let d = data.dim();
    let mean: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| data.sample(i)[j]).sum::<f64>() / n as f64)
        .collect();
    let mut partial = vec![0.0; d];
    let mut centered = vec![0.0; d];
    let mut best = 0.0_f64;
    for i in 0..n - 1 {
        for (c, (y, m)) in centered.iter_mut().zip(data.sample(i).iter().zip(&mean)) {
            *c = y - m;
        }
        for (p, w) in partial.iter_mut().zip(sigma_inv.mul_vec(&centered)) {
            *p += w;
        }
        best = best.max(penalty.dual_norm(&partial));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFilterSpec {
    pub lambda: f64,
    pub penalty: Penalty,
    /// Number of samples averaged into each data matrix (centered window).
    /// `1` uses the raw outer product `y_i y_iᵀ`.
    pub window: usize,
}

impl VarianceFilterSpec {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            penalty: Penalty::Group,
            window: 1,
        }
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }
}

/// Estimated precision matrices `X_i` and covariances `Σ_i = X_i⁻¹`.
#[derive(Debug, Clone)]
pub struct VarianceEstimate {
    pub precision: Vec<SymMatrix>,
    pub covariance: Vec<SymMatrix>,
}

impl VarianceEstimate {
    /// Covariances as row-major flattened blocks (for segmentation / output).
    pub fn covariance_blocks(&self) -> BlockVector {
        BlockVector::new(self.covariance.iter().map(|m| m.as_slice().to_vec()).collect())
            .expect("estimate is non-empty and finite")
    }

    pub fn precision_blocks(&self) -> BlockVector {
        BlockVector::new(self.precision.iter().map(|m| m.as_slice().to_vec()).collect())
            .expect("estimate is non-empty and finite")
    }
}

/// Per-step data matrices: averaged outer products over a centered window.
pub fn scatter_matrices(data: &TimeSeries, window: usize) -> Result<Vec<SymMatrix>> {
    if window == 0 {
        return Err(invalid("window must be at least 1"));
    }
    let n = data.n_samples();
    let d = data.dim();
    let before = (window - 1) / 2;
    let after = window / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(n - 1);
            let mut acc = vec![0.0; d * d];
            for j in lo..=hi {
                let y = data.sample(j);
                for a in 0..d {
                    for b in 0..d {
                        acc[a * d + b] += y[a] * y[b];
                    }
                }
            }
            let count = (hi - lo + 1) as f64;
            acc.iter_mut().for_each(|v| *v /= count);
            SymMatrix::new(d, acc)
        })
        .collect()
}

fn is_singular(s: &SymMatrix) -> Result<bool> {
    let eig = sym_eig(s)?;
    let scale = s.trace().abs().max(f64::MIN_POSITIVE);
    Ok(eig.eigenvalues[0] <= 1e-12 * scale)
}

/// Rejects data for which the variance-filter objective is unbounded below.
///
/// With `λ = 0` every block decouples and each data matrix must be
/// nonsingular; with `λ > 0` the sum of the data matrices must be.
fn check_bounded(scatter: &[SymMatrix], spec: &VarianceFilterSpec) -> Result<()> {
    if spec.lambda == 0.0 {
        for (i, s) in scatter.iter().enumerate() {
            if is_singular(s)? {
                return Err(Error::Unbounded(format!(
                    "lambda = 0 decouples the samples and the data matrix at step {} is singular \
                     (window = {}); use lambda > 0 or a longer window",
                    i + 1,
                    spec.window
                )));
            }
        }
    } else {
        let d = scatter[0].dim();
        let mut total = vec![0.0; d * d];
        for s in scatter {
            for (t, v) in total.iter_mut().zip(s.as_slice()) {
                *t += v;
            }
        }
        if is_singular(&SymMatrix::new(d, total)?)? {
            return Err(Error::Unbounded(format!(
                "the pooled data matrix is singular (lambda = {}, window = {})",
                spec.lambda, spec.window
            )));
        }
    }
    Ok(())
}

fn variance_objective(scatter: &[SymMatrix], lambda: f64, penalty: Penalty, x: &BlockVector, r: &BlockVector) -> f64 {
    let d = scatter[0].dim();
    let mut total = 0.0;
    for (xi, s) in x.blocks().zip(scatter) {
        let Ok(xm) = SymMatrix::new(d, xi.to_vec()) else {
            return f64::INFINITY;
        };
        let Ok(f) = spd_factor(&xm) else {
            return f64::INFINITY;
        };
        total += xm.trace_product(s) - f.log_det();
    }
    total + lambda * r.blocks().map(|ri| penalty.value(ri)).sum::<f64>()
}

/// Builds the variance-filtering chain problem over flattened `n×n` blocks.
pub fn variance_problem(data: &TimeSeries, spec: &VarianceFilterSpec) -> Result<ChainProblem> {
    check_lambda(spec.lambda)?;
    let scatter = scatter_matrices(data, spec.window)?;
    check_bounded(&scatter, spec)?;
    let n = data.dim();
    let lambda = spec.lambda;
    let penalty = spec.penalty;
    let phi_data = scatter.clone();
    let phi = move |i: usize, target: &[f64], rho: f64, out: &mut [f64]| {
        let v = SymMatrix::new(n, target.to_vec())?;
        let x = prox_neg_logdet_cov(&v, &phi_data[i], rho)?;
        out.copy_from_slice(x.as_slice());
        Ok(())
    };
    let psi = move |_: usize, target: &[f64], rho: f64, out: &mut [f64]| {
        penalty.threshold_into(target, lambda / rho, out);
        Ok(())
    };
    Ok(ChainProblem::new(data.n_samples(), n * n, phi, psi)?
        .with_penalty_weight(lambda)
        .with_objective(move |x, r| variance_objective(&scatter, lambda, penalty, x, r)))
}

/// Piecewise-constant covariance estimation in the precision parametrization.
///
/// Estimates come from the consensus iterate when it is positive definite,
/// otherwise from the (always positive definite) prox iterate of that block.
pub fn variance_filter(
    data: &TimeSeries,
    spec: &VarianceFilterSpec,
    config: &SolverConfig,
) -> Result<(VarianceEstimate, SolverReport)> {
    let problem = variance_problem(data, spec)?;
    let config = SolverConfig {
        rho: Some(default_rho(config, spec.lambda)),
        ..config.clone()
    };
    let report = solve(&problem, &config, None)?;
    let n = data.dim();
    let mut precision = Vec::with_capacity(data.n_samples());
    let mut covariance = Vec::with_capacity(data.n_samples());
    for i in 0..data.n_samples() {
        let from_z = SymMatrix::new(n, report.x_star.block(i).to_vec())?;
        let (x, factor) = match spd_factor(&from_z) {
            Ok(f) => (from_z, f),
            Err(_) => {
                let from_x = SymMatrix::new(n, report.state.x.block(i).to_vec())?;
                let f = spd_factor(&from_x)?;
                (from_x, f)
            }
        };
        covariance.push(factor.inverse());
        precision.push(x);
    }
    Ok((VarianceEstimate { precision, covariance }, report))
}

/// Variance analogue of [`lambda_max_mean`]: with `S̄` the mean data matrix
/// and `P_k = Σ_{j≤k} (S_j - S̄)`, the constant solution `S̄⁻¹` is optimal
/// iff `λ ≥ max_k ‖P_k‖` (Frobenius, or max-abs for the elementwise penalty).
pub fn lambda_max_variance(data: &TimeSeries, window: usize, penalty: Penalty) -> Result<f64> {
    let n = data.n_samples();
    if n < 2 {
        return Err(invalid("lambda_max needs at least 2 samples"));
    }
    let scatter = scatter_matrices(data, window)?;
    let dd = scatter[0].as_slice().len();
    let mut mean = vec![0.0; dd];
    for s in &scatter {
        for (m, v) in mean.iter_mut().zip(s.as_slice()) {
            *m += v / n as f64;
        }
    }
    let mut partial = vec![0.0; dd];
    let mut best = 0.0_f64;
    for s in &scatter[..n - 1] {
        for ((p, v), m) in partial.iter_mut().zip(s.as_slice()).zip(&mean) {
            *p += v - m;
        }
        best = best.max(penalty.dual_norm(&partial));
    }
    Ok(best)
}

/// A maximal run of (nearly) equal consecutive blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// First block (0-based, inclusive).
    pub start: usize,
    /// One past the last block.
    pub end: usize,
    /// Mean of the blocks in the run.
    pub level: Vec<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits `estimates` wherever consecutive blocks differ by more than `tol`
/// in the max norm.
pub fn segments(estimates: &BlockVector, tol: f64) -> Vec<Segment> {
    let m = estimates.n_blocks();
    let d = estimates.block_dim();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=m {
        let split = i == m
            || estimates
                .block(i)
                .iter()
                .zip(estimates.block(i - 1))
                .any(|(a, b)| (a - b).abs() > tol);
        if split {
            let mut level = vec![0.0; d];
            for block in start..i {
                for (l, v) in level.iter_mut().zip(estimates.block(block)) {
                    *l += v;
                }
            }
            let count = (i - start) as f64;
            level.iter_mut().for_each(|l| *l /= count);
            out.push(Segment { start, end: i, level });
            start = i;
        }
    }
    out
}

/// `1e-3` times the largest per-component range of the estimates, floored
/// at `1e-9` times their largest magnitude so that rounding-level ripple on a
/// constant estimate is not split into segments.
pub fn default_segment_tol(estimates: &BlockVector) -> f64 {
    let d = estimates.block_dim();
    let spread = (0..d)
        .map(|j| {
            let (lo, hi) = estimates
                .blocks()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
                    (lo.min(b[j]), hi.max(b[j]))
                });
            hi - lo
        })
        .fold(0.0, f64::max);
    (1e-3 * spread).max(1e-9 * estimates.max_abs()).max(f64::MIN_POSITIVE)
}

/// Largest per-component range of the blocks (0 for a constant sequence).
pub fn block_spread(estimates: &BlockVector) -> f64 {
    let d = estimates.block_dim();
    (0..d)
        .map(|j| {
            let (lo, hi) = estimates
                .blocks()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
                    (lo.min(b[j]), hi.max(b[j]))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}
