//! Piecewise-constant mean of a noisy two-dimensional series, with the
//! group penalty and a correlated noise covariance.
//!
//! cargo run --release --example mean_filter

use tvadmm::synth::{generate, SynthConfig};
use tvadmm::{
    default_segment_tol, lambda_max_mean, mean_filter, segments, MeanFilterSpec, Penalty, SolverConfig, SymMatrix,
};

fn main() -> tvadmm::Result<()> {
    let sigma = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]])?;
    let synth = generate(&SynthConfig {
        n_samples: 300,
        dim: 2,
        segments: 4,
        sigma: Some(sigma.clone()),
        seed: 11,
        ..SynthConfig::default()
    })?;

    let lambda_max = lambda_max_mean(&synth.data, &sigma, Penalty::Group)?;
    let spec = MeanFilterSpec::new(0.05 * lambda_max, 2).with_sigma(sigma);
    let config = SolverConfig {
        eps_abs: 1e-6,
        eps_rel: 1e-5,
        ..SolverConfig::default()
    };
    let (estimate, report) = mean_filter(&synth.data, &spec, &config)?;

    println!("lambda_max = {lambda_max:.3}, lambda = {:.3}", spec.lambda);
    println!("converged = {} in {} iterations", report.converged, report.iterations);
    println!("true change points: {:?}", synth.change_points);
    for seg in segments(&estimate, default_segment_tol(&estimate)) {
        println!(
            "[{:3}, {:3})  level = ({:7.3}, {:7.3})",
            seg.start, seg.end, seg.level[0], seg.level[1]
        );
    }
    Ok(())
}
