//! Euclidean projection onto the chain-difference subspace
//! `C = {(z, s) : s_i = z_{i+1} - z_i}`.
//!
//! The projection reduces to solving `(I + DᵀD) z = w + Dᵀv` where `D` is the
//! block forward-difference operator. `I + DᵀD` is block tridiagonal with a
//! scalar pattern Kronecker the identity, so its Cholesky factor is a
//! bidiagonal scalar matrix whose coefficients follow a closed recursion and
//! are computed once per chain length. Every block lane is then solved with
//! the same two sweeps, giving `O(N d)` work per projection.

use crate::error::{invalid, Result};

/// Ordered sequence of equal-length real blocks, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    block_dim: usize,
    data: Vec<f64>,
}

impl BlockVector {
    /// Builds from explicit blocks. Requires at least one block, equal
    /// lengths `≥ 1` and finite entries.
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| invalid("at least one block is required"))?;
        let block_dim = first.len();
        if blocks.iter().any(|b| b.len() != block_dim) {
            return Err(invalid("all blocks must have the same length"));
        }
        Self::from_flat(block_dim, blocks.concat())
    }

    /// Builds from a flat buffer of `M * block_dim` values.
    pub fn from_flat(block_dim: usize, data: Vec<f64>) -> Result<Self> {
        if block_dim == 0 {
            return Err(invalid("block dimension must be at least 1"));
        }
        if data.is_empty() || !data.len().is_multiple_of(block_dim) {
            return Err(invalid(format!(
                "buffer of length {} is not a positive multiple of block dimension {block_dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("block vector has non-finite entries"));
        }
        Ok(Self { block_dim, data })
    }

    /// All-zero vector; `n_blocks` may be zero (e.g. the difference variable
    /// of a single-block chain).
    pub fn zeros(n_blocks: usize, block_dim: usize) -> Self {
        assert!(block_dim > 0, "block dimension must be at least 1");
        Self {
            block_dim,
            data: vec![0.0; n_blocks * block_dim],
        }
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn n_blocks(&self) -> usize {
        self.data.len() / self.block_dim
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.block_dim..(i + 1) * self.block_dim]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.block_dim..(i + 1) * self.block_dim]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.block_dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_blocks(&self) -> Vec<Vec<f64>> {
        self.blocks().map(<[f64]>::to_vec).collect()
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Forward differences `D x`: block `i` is `x_{i+1} - x_i`.
    pub fn differences(&self) -> BlockVector {
        let d = self.block_dim;
        let m = self.n_blocks();
        let mut out = BlockVector::zeros(m.saturating_sub(1), d);
        for i in 0..m.saturating_sub(1) {
            for j in 0..d {
                out.data[i * d + j] = self.data[(i + 1) * d + j] - self.data[i * d + j];
            }
        }
        out
    }
}

/// Bidiagonal Cholesky coefficients of `I + DᵀD` for a chain of `N` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCholesky {
    /// `l_{i,i}`, length `N`.
    pub diag: Vec<f64>,
    /// `l_{i+1,i}`, length `N - 1`.
    pub subdiag: Vec<f64>,
    /// `1 / l_{i,i}`, length `N`.
    pub inv_diag: Vec<f64>,
}

impl ChainCholesky {
    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }
}

/// Computes the Cholesky coefficients for a chain of `n_blocks ≥ 2` blocks.
///
/// `l_11 = √2`; interior rows satisfy `l_{i+1,i} = -1/l_{i,i}`,
/// `l_{i+1,i+1} = √(3 - l_{i+1,i}²)`; the last row uses `2` in place of `3`.
pub fn chain_factor(n_blocks: usize) -> Result<ChainCholesky> {
    if n_blocks < 2 {
        return Err(invalid(format!(
            "chain factorization needs at least 2 blocks, got {n_blocks}"
        )));
    }
    let mut diag = Vec::with_capacity(n_blocks);
    let mut subdiag = Vec::with_capacity(n_blocks - 1);
    diag.push(2.0_f64.sqrt());
    for i in 1..n_blocks {
        let sub = -1.0 / diag[i - 1];
        let center = if i == n_blocks - 1 { 2.0 } else { 3.0 };
        subdiag.push(sub);
        diag.push((center - sub * sub).sqrt());
    }
    let inv_diag = diag.iter().map(|l| 1.0 / l).collect();
    Ok(ChainCholesky {
        diag,
        subdiag,
        inv_diag,
    })
}

fn check_shapes(chol: &ChainCholesky, w: &BlockVector, v: &BlockVector) -> Result<()> {
    let n = chol.n_blocks();
    if w.n_blocks() != n || v.n_blocks() != n - 1 {
        return Err(invalid(format!(
            "projection expects {n} and {} blocks, got {} and {}",
            n - 1,
            w.n_blocks(),
            v.n_blocks()
        )));
    }
    if w.block_dim() != v.block_dim() {
        return Err(invalid(format!(
            "block dimensions differ: {} vs {}",
            w.block_dim(),
            v.block_dim()
        )));
    }
    Ok(())
}

/// Projects `(w, v)` onto `C`, returning `(z, s)` with `s = D z`.
pub fn project(chol: &ChainCholesky, w: &BlockVector, v: &BlockVector) -> Result<(BlockVector, BlockVector)> {
    check_shapes(chol, w, v)?;
    let mut z = BlockVector::zeros(w.n_blocks(), w.block_dim());
    let mut s = BlockVector::zeros(v.n_blocks(), v.block_dim());
    project_into(
        chol,
        w.as_slice(),
        v.as_slice(),
        w.block_dim(),
        z.as_mut_slice(),
        s.as_mut_slice(),
    );
    Ok((z, s))
}

/// Allocation-free projection on flat buffers. Shapes are the caller's
/// responsibility: `w`, `z` hold `N * d` values and `v`, `s` hold `(N-1) * d`.
pub(crate) fn project_into(chol: &ChainCholesky, w: &[f64], v: &[f64], d: usize, z: &mut [f64], s: &mut [f64]) {
    let n = chol.n_blocks();
    let inv = &chol.inv_diag;
    let sub = &chol.subdiag;
    debug_assert_eq!(w.len(), n * d);
    debug_assert_eq!(v.len(), (n - 1) * d);

    // b = w + Dᵀv, then forward solve L y = b. y is stored in z.
    for j in 0..d {
        z[j] = inv[0] * (w[j] - v[j]);
    }
    for i in 1..n {
        let (prev, cur) = z.split_at_mut(i * d);
        let prev = &prev[(i - 1) * d..];
        let cur = &mut cur[..d];
        let wi = &w[i * d..(i + 1) * d];
        let v_prev = &v[(i - 1) * d..i * d];
        if i < n - 1 {
            let v_cur = &v[i * d..(i + 1) * d];
            for j in 0..d {
                let b = wi[j] + v_prev[j] - v_cur[j];
                cur[j] = inv[i] * (b - sub[i - 1] * prev[j]);
            }
        } else {
            for j in 0..d {
                let b = wi[j] + v_prev[j];
                cur[j] = inv[i] * (b - sub[i - 1] * prev[j]);
            }
        }
    }

    // Back solve Lᵀ z = y.
    for j in 0..d {
        z[(n - 1) * d + j] *= inv[n - 1];
    }
    for i in (0..n - 1).rev() {
        let (cur, next) = z.split_at_mut((i + 1) * d);
        let cur = &mut cur[i * d..];
        let next = &next[..d];
        for j in 0..d {
            cur[j] = inv[i] * (cur[j] - sub[i] * next[j]);
        }
    }

    for i in 0..n - 1 {
        for j in 0..d {
            s[i * d + j] = z[(i + 1) * d + j] - z[i * d + j];
        }
    }
}
