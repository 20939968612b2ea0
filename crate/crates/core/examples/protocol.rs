//! Scalar fused-lasso run on a 400-sample, five-segment series at
//! λ = 0.1 λ_max, ρ = λ, α = 1.8, ε_abs = 1e-4, ε_rel = 1e-3. Prints the
//! residual history next to its stopping thresholds.
//!
//! cargo run --release --example protocol [seed]

use std::time::Instant;

use tvadmm::synth::{generate, SynthConfig};
use tvadmm::{lambda_max_mean, mean_filter, MeanFilterSpec, Penalty, SolverConfig, SymMatrix};

fn main() -> tvadmm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2012);
    let synth = generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })?;
    let lambda_max = lambda_max_mean(&synth.data, &SymMatrix::identity(1), Penalty::Elementwise)?;
    let spec = MeanFilterSpec::new(0.1 * lambda_max, 1).with_penalty(Penalty::Elementwise);

    let start = Instant::now();
    let (_, report) = mean_filter(&synth.data, &spec, &SolverConfig::default())?;
    let elapsed = start.elapsed();

    println!("lambda_max = {lambda_max:.3}, lambda = {:.3}", spec.lambda);
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12}",
        "iter", "primal", "eps_pri", "dual", "eps_dual"
    );
    for h in report
        .history
        .iter()
        .filter(|h| h.iter % 10 == 0 || h.iter == report.iterations)
    {
        println!(
            "{:5} {:12.4e} {:12.4e} {:12.4e} {:12.4e}",
            h.iter, h.primal, h.eps_pri, h.dual, h.eps_dual
        );
    }
    println!(
        "converged = {} in {} iterations, {:.2} ms",
        report.converged,
        report.iterations,
        elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}
