//! Test-only oracles. Nothing here calls into the solver's own linear
//! algebra or projection code.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Vec<f64> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for k in (i + 1)..n {
            acc -= a[i * n + k] * x[k];
        }
        x[i] = acc / a[i * n + i];
    }
    x
}

/// Scalar `I + DᵀD` for a chain of `n` blocks, dense row-major.
pub fn chain_matrix(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    for i in 0..n - 1 {
        // DᵀD contribution of difference i: e_{i+1} - e_i
        a[i * n + i] += 1.0;
        a[(i + 1) * n + i + 1] += 1.0;
        a[i * n + i + 1] -= 1.0;
        a[(i + 1) * n + i] -= 1.0;
    }
    a
}

/// Textbook dense Cholesky, lower factor row-major.
pub fn dense_cholesky(a: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    l
}

/// Projection onto `{s = Dz}` by a dense solve of `(I + DᵀD) z = w + Dᵀv`
/// applied lane by lane. `w` is `n × d`, `v` is `(n-1) × d`, both flat.
pub fn dense_projection(w: &[f64], v: &[f64], n: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let a = chain_matrix(n);
    let mut z = vec![0.0; n * d];
    for lane in 0..d {
        let mut b: Vec<f64> = (0..n).map(|i| w[i * d + lane]).collect();
        for i in 0..n - 1 {
            // Dᵀ v: row i gets -v_i, row i+1 gets +v_i
            b[i] -= v[i * d + lane];
            b[i + 1] += v[i * d + lane];
        }
        let zl = dense_solve(a.clone(), b, n);
        for i in 0..n {
            z[i * d + lane] = zl[i];
        }
    }
    let mut s = vec![0.0; (n - 1) * d];
    for i in 0..n - 1 {
        for lane in 0..d {
            s[i * d + lane] = z[(i + 1) * d + lane] - z[i * d + lane];
        }
    }
    (z, s)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Iterates of a plain (α = 1) scaled-form ADMM for the scalar-Σ mean filter
/// with group penalty, written directly from the update equations with a
/// dense projection. Returns `(x, z)` after each iteration.
pub fn plain_admm_mean(
    y: &[f64],
    d: usize,
    sigma_inv_diag: &[f64],
    lambda: f64,
    rho: f64,
    iterations: usize,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = y.len() / d;
    let mut x = vec![0.0; n * d];
    let mut r = vec![0.0; (n - 1) * d];
    let mut z = vec![0.0; n * d];
    let mut s = vec![0.0; (n - 1) * d];
    let mut u = vec![0.0; n * d];
    let mut t = vec![0.0; (n - 1) * d];
    let mut out = Vec::new();
    for _ in 0..iterations {
        for i in 0..n {
            for j in 0..d {
                let k = i * d + j;
                let si = sigma_inv_diag[j];
                x[k] = (si * y[k] + rho * (z[k] - u[k])) / (si + rho);
            }
        }
        for i in 0..n - 1 {
            let a: Vec<f64> = (0..d).map(|j| s[i * d + j] - t[i * d + j]).collect();
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let kappa = lambda / rho;
            let scale = if norm <= kappa { 0.0 } else { 1.0 - kappa / norm };
            for j in 0..d {
                r[i * d + j] = scale * a[j];
            }
        }
        let w: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
        let v: Vec<f64> = r.iter().zip(&t).map(|(a, b)| a + b).collect();
        let (zn, sn) = dense_projection(&w, &v, n, d);
        z = zn;
        s = sn;
        for k in 0..n * d {
            u[k] += x[k] - z[k];
        }
        for k in 0..(n - 1) * d {
            t[k] += r[k] - s[k];
        }
        out.push((x.clone(), z.clone()));
    }
    out
}
