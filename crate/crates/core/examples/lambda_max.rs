//! Shows the constancy threshold: just above λ_max the estimate is flat,
//! just below it is not.
//!
//! cargo run --release --example lambda_max

use tvadmm::{
    block_spread, lambda_max_mean, mean_filter, MeanFilterSpec, Penalty, SolverConfig, SymMatrix, TimeSeries,
};

fn main() -> tvadmm::Result<()> {
    let y = [0.3, -0.2, 0.1, 0.4, 1.8, 2.2, 1.9, 2.4, 2.0, 0.9];
    let data = TimeSeries::scalar(&y)?;
    let lambda_max = lambda_max_mean(&data, &SymMatrix::identity(1), Penalty::Group)?;
    println!("lambda_max = {lambda_max:.6}");

    let config = SolverConfig {
        eps_abs: 1e-10,
        eps_rel: 1e-10,
        max_iter: 100_000,
        ..SolverConfig::default()
    };
    for factor in [1.01, 0.99, 0.5] {
        let spec = MeanFilterSpec::new(factor * lambda_max, 1);
        let (estimate, _) = mean_filter(&data, &spec, &config)?;
        println!(
            "lambda = {factor:.2} lambda_max: spread {:.3e}",
            block_spread(&estimate)
        );
    }
    Ok(())
}
