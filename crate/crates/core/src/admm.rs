//! ADMM engine for chain-structured problems
//!
//! ```text
//! minimize   Σ_i Φ_i(x_i) + Σ_i Ψ_i(r_i)
//! subject to r_i = x_{i+1} - x_i
//! ```
//!
//! The constraint is handled by a consensus copy `(z, s) ∈ C` so each
//! iteration is: a separable prox step over all `2N - 1` blocks, an
//! (over-relaxed) projection onto `C`, and a scaled dual update.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::projection::{chain_factor, project_into, BlockVector, ChainCholesky};

/// Proximal map family `(i, target, ρ) ↦ argmin_x f_i(x) + (ρ/2)‖x - target‖²`.
pub trait BlockProx: Send + Sync {
    /// Writes the minimizer for block `i` into `out` (same length as `target`).
    fn prox(&self, i: usize, target: &[f64], rho: f64, out: &mut [f64]) -> Result<()>;
}

impl<F> BlockProx for F
where
    F: Fn(usize, &[f64], f64, &mut [f64]) -> Result<()> + Send + Sync,
{
    fn prox(&self, i: usize, target: &[f64], rho: f64, out: &mut [f64]) -> Result<()> {
        self(i, target, rho, out)
    }
}

/// Objective `f(x, r)` evaluated on the feasible iterate `(z, s)`.
pub type Objective = Box<dyn Fn(&BlockVector, &BlockVector) -> f64 + Send + Sync>;

/// A problem instance: chain length, block size and the two prox families.
pub struct ChainProblem {
    n_blocks: usize,
    block_dim: usize,
    phi: Box<dyn BlockProx>,
    psi: Box<dyn BlockProx>,
    objective: Option<Objective>,
    penalty_weight: Option<f64>,
}

impl ChainProblem {
    pub fn new(
        n_blocks: usize,
        block_dim: usize,
        phi: impl BlockProx + 'static,
        psi: impl BlockProx + 'static,
    ) -> Result<Self> {
        if n_blocks == 0 || block_dim == 0 {
            return Err(invalid(
                "chain problems need at least one block of dimension at least 1",
            ));
        }
        Ok(Self {
            n_blocks,
            block_dim,
            phi: Box::new(phi),
            psi: Box::new(psi),
            objective: None,
            penalty_weight: None,
        })
    }

    /// Attaches an objective; the solver then records it every iteration and
    /// guards against unbounded descent.
    pub fn with_objective(mut self, f: impl Fn(&BlockVector, &BlockVector) -> f64 + Send + Sync + 'static) -> Self {
        self.objective = Some(Box::new(f));
        self
    }

    /// Declares the difference-penalty weight `λ`; used as the default `ρ`.
    pub fn with_penalty_weight(mut self, lambda: f64) -> Self {
        self.penalty_weight = Some(lambda);
        self
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn penalty_weight(&self) -> Option<f64> {
        self.penalty_weight
    }

    pub fn objective(&self, x: &BlockVector, r: &BlockVector) -> Option<f64> {
        self.objective.as_ref().map(|f| f(x, r))
    }
}

/// Solver parameters. `rho = None` means "use `λ` if the problem declares a
/// positive one, otherwise 1".
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rho: Option<f64>,
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Worker threads for the separable steps; 1 runs everything on the
    /// calling thread and is the reproducible reference mode.
    pub threads: usize,
    /// The solve is aborted as unbounded once the recorded objective falls
    /// below `-divergence_floor`.
    pub divergence_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: None,
            alpha: 1.8,
            eps_abs: 1e-4,
            eps_rel: 1e-3,
            max_iter: 10_000,
            threads: 1,
            divergence_floor: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(invalid(format!("rho must be positive, got {rho}")));
            }
        }
        if !(1.0..2.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha must lie in [1, 2), got {}", self.alpha)));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if self.threads == 0 {
            return Err(invalid("threads must be at least 1"));
        }
        if !(self.divergence_floor > 0.0) {
            return Err(invalid("divergence floor must be positive"));
        }
        Ok(())
    }

    /// Penalty parameter actually used for `problem`.
    pub fn resolve_rho(&self, problem: &ChainProblem) -> f64 {
        self.rho
            .or(problem.penalty_weight.filter(|l| *l > 0.0 && l.is_finite()))
            .unwrap_or(1.0)
    }
}

/// Residual norms and tolerances at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
}

impl Residuals {
    pub fn satisfied(&self) -> bool {
        self.primal <= self.eps_pri && self.dual <= self.eps_dual
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
}

/// Full ADMM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: BlockVector,
    pub r: BlockVector,
    pub z: BlockVector,
    pub s: BlockVector,
    pub u: BlockVector,
    pub t: BlockVector,
}

impl AdmmState {
    pub fn zeros(n_blocks: usize, block_dim: usize) -> Self {
        let m = n_blocks - 1;
        Self {
            x: BlockVector::zeros(n_blocks, block_dim),
            r: BlockVector::zeros(m, block_dim),
            z: BlockVector::zeros(n_blocks, block_dim),
            s: BlockVector::zeros(m, block_dim),
            u: BlockVector::zeros(n_blocks, block_dim),
            t: BlockVector::zeros(m, block_dim),
        }
    }

    fn check_shape(&self, n_blocks: usize, block_dim: usize) -> Result<()> {
        let ok = [&self.x, &self.z, &self.u]
            .iter()
            .all(|b| b.n_blocks() == n_blocks && b.block_dim() == block_dim)
            && [&self.r, &self.s, &self.t]
                .iter()
                .all(|b| b.n_blocks() == n_blocks - 1 && b.block_dim() == block_dim);
        if ok {
            Ok(())
        } else {
            Err(invalid("warm start does not match the problem shape"))
        }
    }
}

fn sum_sq(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn diff_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Primal/dual residuals of `state` given the previous consensus iterate.
///
/// `e_p = (x - z, r - s)`, `e_d = -ρ (z - z_prev, s - s_prev)`; tolerances use
/// the full stacked dimension `(2N - 1) d`.
pub fn residuals(
    state: &AdmmState,
    z_prev: &BlockVector,
    s_prev: &BlockVector,
    rho: f64,
    eps_abs: f64,
    eps_rel: f64,
) -> Residuals {
    let p = (state.x.as_slice().len() + state.r.as_slice().len()) as f64;
    let primal =
        (diff_sq(state.x.as_slice(), state.z.as_slice()) + diff_sq(state.r.as_slice(), state.s.as_slice())).sqrt();
    let dual =
        rho * (diff_sq(state.z.as_slice(), z_prev.as_slice()) + diff_sq(state.s.as_slice(), s_prev.as_slice())).sqrt();
    let xr = (sum_sq(state.x.as_slice()) + sum_sq(state.r.as_slice())).sqrt();
    let zs = (sum_sq(state.z.as_slice()) + sum_sq(state.s.as_slice())).sqrt();
    let ut = (sum_sq(state.u.as_slice()) + sum_sq(state.t.as_slice())).sqrt();
    Residuals {
        primal,
        dual,
        eps_pri: p.sqrt() * eps_abs + eps_rel * xr.max(zs),
        eps_dual: p.sqrt() * eps_abs + eps_rel * rho * ut,
    }
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Block estimates, taken from the consensus iterate `z`.
    pub x_star: BlockVector,
    /// Differences of `x_star` (`= s`, so `r_star = D x_star` exactly).
    pub r_star: BlockVector,
    pub iterations: usize,
    pub converged: bool,
    pub rho: f64,
    pub history: Vec<IterationRecord>,
    /// Objective at `(z, s)` per iteration; empty when the problem has none.
    pub objective_trace: Vec<f64>,
    /// Final iterate, usable as a warm start.
    pub state: AdmmState,
}

/// Over-relaxation `α·fresh + (1 - α)·prev`.
fn relax(alpha: f64, fresh: &[f64], prev: &[f64], out: &mut [f64]) {
    for ((o, f), p) in out.iter_mut().zip(fresh).zip(prev) {
        *o = alpha * f + (1.0 - alpha) * p;
    }
}

struct ProxStep<'a> {
    prox: &'a dyn BlockProx,
    name: &'static str,
    rho: f64,
    iteration: usize,
}

impl ProxStep<'_> {
    fn block(&self, i: usize, consensus: &[f64], dual: &[f64], target: &mut [f64], out: &mut [f64]) -> Result<()> {
        for ((t, c), u) in target.iter_mut().zip(consensus).zip(dual) {
            *t = c - u;
        }
        self.prox.prox(i, target, self.rho, out)?;
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite {
                map: self.name,
                iteration: self.iteration,
                block: i,
            })
        }
    }

    fn run(
        &self,
        d: usize,
        consensus: &[f64],
        dual: &[f64],
        out: &mut [f64],
        pool: Option<&rayon::ThreadPool>,
    ) -> Result<()> {
        match pool {
            None => {
                let mut target = vec![0.0; d];
                for (i, o) in out.chunks_exact_mut(d).enumerate() {
                    self.block(
                        i,
                        &consensus[i * d..(i + 1) * d],
                        &dual[i * d..(i + 1) * d],
                        &mut target,
                        o,
                    )?;
                }
                Ok(())
            }
            Some(pool) => pool.install(|| {
                out.par_chunks_mut(d).enumerate().try_for_each_init(
                    || vec![0.0; d],
                    |target, (i, o)| {
                        self.block(i, &consensus[i * d..(i + 1) * d], &dual[i * d..(i + 1) * d], target, o)
                    },
                )
            }),
        }
    }
}

/// Runs ADMM on `problem` from zero (or from `warm_start`).
pub fn solve(problem: &ChainProblem, config: &SolverConfig, warm_start: Option<&AdmmState>) -> Result<SolverReport> {
    config.validate()?;
    let n = problem.n_blocks;
    let d = problem.block_dim;
    let rho = config.resolve_rho(problem);
    let alpha = config.alpha;

    // A single block has no difference constraint: C is the whole space and
    // the projection is the identity.
    let chol: Option<ChainCholesky> = if n >= 2 { Some(chain_factor(n)?) } else { None };

    let mut st = match warm_start {
        Some(ws) => {
            ws.check_shape(n, d)?;
            ws.clone()
        }
        None => AdmmState::zeros(n, d),
    };

    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| invalid(format!("could not start worker threads: {e}")))?,
        )
    } else {
        None
    };

    let mut z_prev = st.z.clone();
    let mut s_prev = st.s.clone();
    let mut xh = vec![0.0; n * d];
    let mut rh = vec![0.0; (n - 1) * d];
    let mut w = vec![0.0; n * d];
    let mut v = vec![0.0; (n - 1) * d];

    let mut history = Vec::new();
    let mut objective_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=config.max_iter {
        iterations = k;

        // Step 1: separable prox updates.
        let phi = ProxStep {
            prox: problem.phi.as_ref(),
            name: "phi",
            rho,
            iteration: k,
        };
        phi.run(d, st.z.as_slice(), st.u.as_slice(), st.x.as_mut_slice(), pool.as_ref())?;
        let psi = ProxStep {
            prox: problem.psi.as_ref(),
            name: "psi",
            rho,
            iteration: k,
        };
        psi.run(d, st.s.as_slice(), st.t.as_slice(), st.r.as_mut_slice(), pool.as_ref())?;

        // Step 2: relaxed projection onto C.
        z_prev.as_mut_slice().copy_from_slice(st.z.as_slice());
        s_prev.as_mut_slice().copy_from_slice(st.s.as_slice());
        relax(alpha, st.x.as_slice(), z_prev.as_slice(), &mut xh);
        relax(alpha, st.r.as_slice(), s_prev.as_slice(), &mut rh);
        for ((wi, a), b) in w.iter_mut().zip(&xh).zip(st.u.as_slice()) {
            *wi = a + b;
        }
        for ((vi, a), b) in v.iter_mut().zip(&rh).zip(st.t.as_slice()) {
            *vi = a + b;
        }
        match &chol {
            Some(c) => project_into(c, &w, &v, d, st.z.as_mut_slice(), st.s.as_mut_slice()),
            None => st.z.as_mut_slice().copy_from_slice(&w),
        }

        // Step 3: dual update.
        for ((ui, a), b) in st.u.as_mut_slice().iter_mut().zip(&xh).zip(st.z.as_slice()) {
            *ui += a - b;
        }
        for ((ti, a), b) in st.t.as_mut_slice().iter_mut().zip(&rh).zip(st.s.as_slice()) {
            *ti += a - b;
        }

        let res = residuals(&st, &z_prev, &s_prev, rho, config.eps_abs, config.eps_rel);
        history.push(IterationRecord {
            iter: k,
            primal: res.primal,
            dual: res.dual,
            eps_pri: res.eps_pri,
            eps_dual: res.eps_dual,
        });

        if let Some(obj) = problem.objective(&st.z, &st.s) {
            objective_trace.push(obj);
            if obj < -config.divergence_floor {
                return Err(Error::Unbounded(format!("objective reached {obj:e} at iteration {k}")));
            }
        }

        if res.satisfied() {
            converged = true;
            break;
        }
    }

    Ok(SolverReport {
        x_star: st.z.clone(),
        r_star: st.s.clone(),
        iterations,
        converged,
        rho,
        history,
        objective_trace,
        state: st,
    })
}
