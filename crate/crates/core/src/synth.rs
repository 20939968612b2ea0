//! Seeded synthetic piecewise-constant series.
//!
//! All randomness comes from a ChaCha8 stream seeded with a single `u64`
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`), so the output is identical
//! across platforms for a given seed.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::filters::TimeSeries;
use crate::linalg::{spd_factor, SymMatrix};
use crate::projection::BlockVector;

const MAX_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub dim: usize,
    pub segments: usize,
    /// Segment means are drawn i.i.d. uniform in this range, per component.
    pub level_range: (f64, f64),
    /// Noise covariance; identity when `None`.
    pub sigma: Option<SymMatrix>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 400,
            dim: 1,
            segments: 5,
            level_range: (-5.0, 5.0),
            sigma: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub data: TimeSeries,
    /// True mean at every time step.
    pub truth: BlockVector,
    /// First index (0-based) of every segment after the first.
    pub change_points: Vec<usize>,
}

impl SynthConfig {
    /// Shortest allowed segment, `N / (4K)` (at least 1).
    pub fn min_segment_len(&self) -> usize {
        (self.n_samples / (4 * self.segments.max(1))).max(1)
    }
}

/// Draws change points uniformly without replacement, redrawing until every
/// segment has at least the minimum length.
fn draw_change_points(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Result<Vec<usize>> {
    let n = cfg.n_samples;
    let k = cfg.segments;
    let min_len = cfg.min_segment_len();
    if k * min_len > n {
        return Err(invalid(format!(
            "{k} segments of at least {min_len} samples do not fit in {n} samples"
        )));
    }
    if k == 1 {
        return Ok(Vec::new());
    }
    for _ in 0..MAX_DRAWS {
        let mut cps: Vec<usize> = index::sample(rng, n - 1, k - 1).into_iter().map(|i| i + 1).collect();
        cps.sort_unstable();
        let mut prev = 0;
        let ok = cps.iter().chain(std::iter::once(&n)).all(|&c| {
            let fits = c - prev >= min_len;
            prev = c;
            fits
        });
        if ok {
            return Ok(cps);
        }
    }
    Err(invalid(format!(
        "could not place {k} segments of at least {min_len} samples in {n} samples"
    )))
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    if cfg.n_samples == 0 || cfg.dim == 0 || cfg.segments == 0 {
        return Err(invalid("samples, dimension and segment count must all be positive"));
    }
    let (lo, hi) = cfg.level_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("level range must be a finite interval lo < hi"));
    }
    let d = cfg.dim;
    let noise_factor = match &cfg.sigma {
        Some(s) if s.dim() != d => return Err(invalid("noise covariance dimension does not match dim")),
        Some(s) => Some(spd_factor(s)?),
        None => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let change_points = draw_change_points(&mut rng, cfg)?;
    let levels: Vec<Vec<f64>> = (0..cfg.segments)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect();

    let mut truth = Vec::with_capacity(cfg.n_samples * d);
    let mut seg = 0;
    for i in 0..cfg.n_samples {
        if seg < change_points.len() && i == change_points[seg] {
            seg += 1;
        }
        truth.extend_from_slice(&levels[seg]);
    }
    let truth = BlockVector::from_flat(d, truth)?;

    let mut rows = Vec::with_capacity(cfg.n_samples);
    let mut eps = vec![0.0; d];
    for mean in truth.blocks() {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let row: Vec<f64> = match &noise_factor {
            None => mean.iter().zip(&eps).map(|(m, e)| m + e).collect(),
            Some(l) => (0..d)
                .map(|a| mean[a] + (0..=a).map(|b| l.get(a, b) * eps[b]).sum::<f64>())
                .collect(),
        };
        rows.push(row);
    }

    Ok(SynthData {
        data: TimeSeries::new(rows)?,
        truth,
        change_points,
    })
}
