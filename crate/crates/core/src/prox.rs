//! Closed-form proximal maps used in the block-separable step of ADMM.
//!
//! Every map here evaluates `argmin_x f(x) + (ρ/2)‖x - v‖²` for a specific
//! `f`, written in terms of the target `v` and penalty `ρ`.

use crate::error::{invalid, Result};
use crate::linalg::{spd_factor, sym_eig, SpdFactor, SymMatrix};
use crate::projection::BlockVector;

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("rho must be positive and finite, got {rho}")))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "threshold must be nonnegative and finite, got {kappa}"
        )))
    }
}

enum System {
    /// Σ diagonal: stores `Σ⁻¹` diagonal and `1 / (Σ⁻¹_jj + ρ)`.
    Diagonal {
        sigma_inv: Vec<f64>,
        inv_system: Vec<f64>,
    },
    Dense {
        sigma_inv: SymMatrix,
        factor: SpdFactor,
    },
}

/// Precomputed data for the Gaussian data-fit prox
/// `Φ_i(x) = ½ (y_i - x)ᵀ Σ⁻¹ (y_i - x)` at a fixed `ρ`.
pub struct GaussianProxCache {
    sigma_inv_y: BlockVector,
    system: System,
    rho: f64,
}

impl GaussianProxCache {
    /// Validates `Σ` (must be SPD) and caches `Σ⁻¹ y_i` and the
    /// factorization of `Σ⁻¹ + ρI`.
    pub fn new(sigma: &SymMatrix, observations: &BlockVector, rho: f64) -> Result<Self> {
        Self::build(sigma, observations, rho, true)
    }

    /// Same as [`GaussianProxCache::new`] but never takes the diagonal fast path.
    pub fn new_dense(sigma: &SymMatrix, observations: &BlockVector, rho: f64) -> Result<Self> {
        Self::build(sigma, observations, rho, false)
    }

    fn build(sigma: &SymMatrix, observations: &BlockVector, rho: f64, allow_diagonal: bool) -> Result<Self> {
        check_rho(rho)?;
        let n = sigma.dim();
        if observations.block_dim() != n {
            return Err(invalid(format!(
                "covariance is {n}x{n} but observations have dimension {}",
                observations.block_dim()
            )));
        }
        let sigma_factor = spd_factor(sigma)?;
        let system = if allow_diagonal && sigma.is_diagonal() {
            let sigma_inv: Vec<f64> = (0..n).map(|j| 1.0 / sigma.get(j, j)).collect();
            let inv_system = sigma_inv.iter().map(|s| 1.0 / (s + rho)).collect();
            System::Diagonal { sigma_inv, inv_system }
        } else {
            let sigma_inv = sigma_factor.inverse();
            let mut shifted = sigma_inv.as_slice().to_vec();
            for j in 0..n {
                shifted[j * n + j] += rho;
            }
            let factor = spd_factor(&SymMatrix::new(n, shifted)?)?;
            System::Dense { sigma_inv, factor }
        };
        let mut sigma_inv_y = observations.clone();
        for i in 0..observations.n_blocks() {
            let y = observations.block(i);
            let out = sigma_inv_y.block_mut(i);
            match &system {
                System::Diagonal { sigma_inv, .. } => {
                    for j in 0..n {
                        out[j] = sigma_inv[j] * y[j];
                    }
                }
                System::Dense { sigma_inv, .. } => out.copy_from_slice(&sigma_inv.mul_vec(y)),
            }
        }
        Ok(Self {
            sigma_inv_y,
            system,
            rho,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n_blocks(&self) -> usize {
        self.sigma_inv_y.n_blocks()
    }

    pub fn dim(&self) -> usize {
        self.sigma_inv_y.block_dim()
    }

    /// `Σ⁻¹ y_i` for every block.
    pub fn sigma_inv_y(&self) -> &BlockVector {
        &self.sigma_inv_y
    }

    /// Writes `(Σ⁻¹ + ρI)⁻¹ (Σ⁻¹ y_i + ρ vbar)` into `out`.
    pub fn prox_into(&self, i: usize, vbar: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if vbar.len() != n || out.len() != n {
            return Err(invalid(format!("prox target must have length {n}, got {}", vbar.len())));
        }
        if i >= self.n_blocks() {
            return Err(invalid(format!("block index {i} out of range")));
        }
        let siy = self.sigma_inv_y.block(i);
        match &self.system {
            System::Diagonal { inv_system, .. } => {
                for j in 0..n {
                    out[j] = inv_system[j] * (siy[j] + self.rho * vbar[j]);
                }
            }
            System::Dense { factor, .. } => {
                for j in 0..n {
                    out[j] = siy[j] + self.rho * vbar[j];
                }
                factor.solve_in_place(out)?;
            }
        }
        Ok(())
    }
}

/// Minimizer of `½(y_i - x)ᵀΣ⁻¹(y_i - x) + (ρ/2)‖x - vbar‖²`.
pub fn prox_gaussian(cache: &GaussianProxCache, i: usize, vbar: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cache.dim()];
    cache.prox_into(i, vbar, &mut out)?;
    Ok(out)
}

/// Block (group) soft threshold `(1 - κ/‖a‖₂)₊ a`, zero at `a = 0`.
///
/// Applied to a flattened matrix this is the Frobenius-norm threshold.
pub fn soft_threshold_group(a: &[f64], kappa: f64) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let mut out = vec![0.0; a.len()];
    group_threshold_into(a, kappa, &mut out);
    Ok(out)
}

/// Componentwise soft threshold `sign(a_j) max(|a_j| - κ, 0)`.
pub fn soft_threshold_scalar(a: &[f64], kappa: f64) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let mut out = vec![0.0; a.len()];
    scalar_threshold_into(a, kappa, &mut out);
    Ok(out)
}

pub(crate) fn group_threshold_into(a: &[f64], kappa: f64, out: &mut [f64]) {
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= kappa {
        out.fill(0.0);
        return;
    }
    let scale = 1.0 - kappa / norm;
    for (o, v) in out.iter_mut().zip(a) {
        *o = scale * v;
    }
}

pub(crate) fn scalar_threshold_into(a: &[f64], kappa: f64, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(a) {
        *o = if v > kappa {
            v - kappa
        } else if v < -kappa {
            v + kappa
        } else {
            0.0
        };
    }
}

/// Positive root of `ρ μ² - λ μ - 1 = 0`, i.e. `(λ + √(λ² + 4ρ)) / (2ρ)`.
///
/// For negative `λ` the equivalent form `2 / (√(λ² + 4ρ) - λ)` avoids
/// cancellation.
pub(crate) fn logdet_eigen_map(lambda: f64, rho: f64) -> f64 {
    let root = (lambda * lambda + 4.0 * rho).sqrt();
    if lambda >= 0.0 {
        (lambda + root) / (2.0 * rho)
    } else {
        2.0 / (root - lambda)
    }
}

/// Prox of `Tr(X S) - log det X` at target `V`:
/// eigendecompose `ρV - S = QΛQᵀ` and return `Q diag(μ) Qᵀ`.
pub fn prox_neg_logdet_cov(v: &SymMatrix, s: &SymMatrix, rho: f64) -> Result<SymMatrix> {
    check_rho(rho)?;
    if v.dim() != s.dim() {
        return Err(invalid(format!(
            "target is {0}x{0} but data matrix is {1}x{1}",
            v.dim(),
            s.dim()
        )));
    }
    let n = v.dim();
    let m: Vec<f64> = v
        .as_slice()
        .iter()
        .zip(s.as_slice())
        .map(|(a, b)| rho * a - b)
        .collect();
    let eig = sym_eig(&SymMatrix::new(n, m)?)?;
    Ok(eig.reconstruct_with(|l| logdet_eigen_map(l, rho)))
}

/// Prox of `Tr(X y yᵀ) - log det X` at target `V` (rank-one data term).
pub fn prox_neg_logdet(v: &SymMatrix, y: &[f64], rho: f64) -> Result<SymMatrix> {
    if y.len() != v.dim() {
        return Err(invalid(format!(
            "sample has length {} but target is {}x{}",
            y.len(),
            v.dim(),
            v.dim()
        )));
    }
    prox_neg_logdet_cov(v, &SymMatrix::outer(y), rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn gaussian_examples() {
        let ys = BlockVector::new(vec![vec![2.0]]).unwrap();
        let c = GaussianProxCache::new(&SymMatrix::identity(1), &ys, 1.0).unwrap();
        assert!(close(&prox_gaussian(&c, 0, &[0.0]).unwrap(), &[1.0], 1e-15));

        let ys = BlockVector::new(vec![vec![4.0, 0.0]]).unwrap();
        let c = GaussianProxCache::new(&SymMatrix::identity(2), &ys, 3.0).unwrap();
        assert!(close(&prox_gaussian(&c, 0, &[0.0, 4.0]).unwrap(), &[1.0, 3.0], 1e-15));

        // vbar = y is a fixed point for any Σ, ρ
        let sigma = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let ys = BlockVector::new(vec![vec![1.5, -2.0]]).unwrap();
        let c = GaussianProxCache::new(&sigma, &ys, 0.7).unwrap();
        assert!(close(&prox_gaussian(&c, 0, &[1.5, -2.0]).unwrap(), &[1.5, -2.0], 1e-14));
    }

    #[test]
    fn gaussian_errors() {
        let ys = BlockVector::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(GaussianProxCache::new(&SymMatrix::identity(3), &ys, 1.0).is_err());
        assert!(GaussianProxCache::new(&SymMatrix::identity(2), &ys, 0.0).is_err());
        let indefinite = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(GaussianProxCache::new(&indefinite, &ys, 1.0).is_err());
        let c = GaussianProxCache::new(&SymMatrix::identity(2), &ys, 1.0).unwrap();
        assert!(prox_gaussian(&c, 0, &[1.0]).is_err());
    }

    #[test]
    fn diagonal_fast_path_matches_dense() {
        let sigma = SymMatrix::from_diag(&[0.3, 2.0, 5.0]);
        let ys = BlockVector::new(vec![vec![1.0, -2.0, 0.25], vec![3.0, 0.0, -1.0]]).unwrap();
        let fast = GaussianProxCache::new(&sigma, &ys, 1.7).unwrap();
        let dense = GaussianProxCache::new_dense(&sigma, &ys, 1.7).unwrap();
        for i in 0..2 {
            let v = [0.4, -0.1 * i as f64, 2.0];
            let a = prox_gaussian(&fast, i, &v).unwrap();
            let b = prox_gaussian(&dense, i, &v).unwrap();
            assert!(close(&a, &b, 1e-12), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn group_threshold_examples() {
        assert!(close(
            &soft_threshold_group(&[3.0, 4.0], 1.0).unwrap(),
            &[2.4, 3.2],
            1e-15
        ));
        assert_eq!(soft_threshold_group(&[0.0, 0.0], 0.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(soft_threshold_group(&[0.0, 0.0], 5.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(soft_threshold_group(&[1.0, 0.0], 2.0).unwrap(), vec![0.0, 0.0]);
        assert!(soft_threshold_group(&[1.0], -0.1).is_err());
    }

    #[test]
    fn scalar_threshold_examples() {
        assert_eq!(
            soft_threshold_scalar(&[2.0, -0.5, 0.0], 1.0).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(
            soft_threshold_scalar(&[2.0, -0.5, 0.0], 0.0).unwrap(),
            vec![2.0, -0.5, 0.0]
        );
        assert_eq!(soft_threshold_scalar(&[-3.0], 1.0).unwrap(), vec![-2.0]);
        assert!(soft_threshold_scalar(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn logdet_examples() {
        let x = prox_neg_logdet(&SymMatrix::from_diag(&[0.0]), &[0.0], 1.0).unwrap();
        assert!((x.get(0, 0) - 1.0).abs() < 1e-15);

        let x = prox_neg_logdet(&SymMatrix::from_diag(&[2.0]), &[0.0], 1.0).unwrap();
        assert!((x.get(0, 0) - (2.0 + 8.0_f64.sqrt()) / 2.0).abs() < 1e-14);

        let x = prox_neg_logdet(&SymMatrix::identity(2), &[0.0, 0.0], 1.0).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!(close(x.as_slice(), &[phi, 0.0, 0.0, phi], 1e-14));

        assert!(prox_neg_logdet(&SymMatrix::identity(2), &[0.0, 0.0], 0.0).is_err());
        assert!(prox_neg_logdet(&SymMatrix::identity(2), &[0.0], 1.0).is_err());
    }

    #[test]
    fn logdet_map_is_stable_for_large_negative_eigenvalues() {
        let mu = logdet_eigen_map(-1e9, 1.0);
        // ρμ² - λμ - 1 = 0 → μ ≈ 1/|λ|
        assert!((mu * 1e9 - 1.0).abs() < 1e-12);
        assert!(mu > 0.0);
    }
}
