//! Builds a chain problem from closures: a Huber-like fit
//! `Φ_i(x) = |x - y_i|` with a quadratic smoothness term
//! `Ψ(r) = (μ/2) r²`, and solves it with the generic engine.
//!
//! cargo run --example custom_problem

use tvadmm::{soft_threshold_scalar, solve, ChainProblem, SolverConfig};

fn main() -> tvadmm::Result<()> {
    let y = vec![0.0, 0.1, 5.0, 0.2, 0.1, 2.0, 2.1, 1.9, 2.0, 2.2];
    let mu = 4.0;
    let n = y.len();

    let data = y.clone();
    let phi = move |i: usize, t: &[f64], rho: f64, out: &mut [f64]| {
        // prox of |x - y_i| is y_i + soft(t - y_i, 1/ρ)
        let shrunk = soft_threshold_scalar(&[t[0] - data[i]], 1.0 / rho)?;
        out[0] = data[i] + shrunk[0];
        Ok(())
    };
    let psi = move |_: usize, t: &[f64], rho: f64, out: &mut [f64]| {
        out[0] = rho * t[0] / (mu + rho);
        Ok(())
    };

    let problem = ChainProblem::new(n, 1, phi, psi)?;
    let config = SolverConfig {
        rho: Some(1.0),
        eps_abs: 1e-8,
        eps_rel: 1e-6,
        ..SolverConfig::default()
    };
    let report = solve(&problem, &config, None)?;
    println!(
        "converged = {} after {} iterations",
        report.converged, report.iterations
    );
    for (yi, xi) in y.iter().zip(report.x_star.blocks()) {
        println!("{yi:6.2} -> {:8.4}", xi[0]);
    }
    Ok(())
}
