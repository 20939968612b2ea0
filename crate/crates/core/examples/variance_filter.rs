//! Piecewise-constant variance of a zero-mean scalar series whose variance
//! jumps from 1 to 10 halfway through.
//!
//! cargo run --release --example variance_filter

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tvadmm::{
    default_segment_tol, lambda_max_variance, segments, variance_filter, Penalty, SolverConfig, TimeSeries,
    VarianceFilterSpec,
};

fn main() -> tvadmm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let y: Vec<f64> = (0..400)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if i < 200 {
                z
            } else {
                10.0_f64.sqrt() * z
            }
        })
        .collect();
    let data = TimeSeries::scalar(&y)?;

    let lambda_max = lambda_max_variance(&data, 1, Penalty::Group)?;
    let config = SolverConfig {
        eps_abs: 1e-6,
        eps_rel: 1e-6,
        max_iter: 100_000,
        ..SolverConfig::default()
    };
    for frac in [0.5, 0.1, 0.02] {
        let spec = VarianceFilterSpec::new(frac * lambda_max);
        let (estimate, report) = variance_filter(&data, &spec, &config)?;
        let cov = estimate.covariance_blocks();
        let segs = segments(&cov, default_segment_tol(&cov));
        println!(
            "lambda = {:.2} ({frac} lambda_max): {} iterations, {} segments",
            spec.lambda,
            report.iterations,
            segs.len()
        );
        for seg in segs.iter().take(4) {
            println!("    [{:3}, {:3})  variance = {:.3}", seg.start, seg.end, seg.level[0]);
        }
    }
    Ok(())
}
