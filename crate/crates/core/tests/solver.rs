mod common;

use common::*;
use tvadmm::*;

fn scalar_series(seed: u64, n: usize) -> TimeSeries {
    let mut rng = rng(seed);
    let y: Vec<f64> = normals(&mut rng, n)
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v + if i < n / 3 {
                -2.0
            } else if i < 2 * n / 3 {
                1.0
            } else {
                3.0
            }
        })
        .collect();
    TimeSeries::scalar(&y).unwrap()
}

#[test]
fn warm_start_from_solution_stops_quickly() {
    let data = scalar_series(41, 60);
    let spec = MeanFilterSpec::new(4.0, 1);
    let cfg = SolverConfig::default();
    let problem = mean_problem(&data, &spec, 4.0).unwrap();
    let first = solve(&problem, &cfg, None).unwrap();
    assert!(first.converged);
    let again = solve(&problem, &cfg, Some(&first.state)).unwrap();
    assert!(again.converged);
    assert!(again.iterations <= 2, "took {} iterations", again.iterations);
}

#[test]
fn sequential_runs_are_bit_identical() {
    let data = scalar_series(42, 80);
    let spec = MeanFilterSpec::new(3.0, 1);
    let (a, ra) = mean_filter(&data, &spec, &SolverConfig::default()).unwrap();
    let (b, rb) = mean_filter(&data, &spec, &SolverConfig::default()).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
    assert_eq!(ra.iterations, rb.iterations);
    assert_eq!(ra.state.u.as_slice(), rb.state.u.as_slice());
}

#[test]
fn objective_close_to_tight_reference() {
    let data = scalar_series(43, 100);
    let spec = MeanFilterSpec::new(5.0, 1);
    let (est, rep) = mean_filter(&data, &spec, &SolverConfig::default()).unwrap();
    let tight = SolverConfig {
        eps_abs: 1e-10,
        eps_rel: 1e-10,
        max_iter: 200_000,
        ..SolverConfig::default()
    };
    let (reference, _) = mean_filter(&data, &spec, &tight).unwrap();
    let f = mean_objective(&data, &spec, &est).unwrap();
    let f_ref = mean_objective(&data, &spec, &reference).unwrap();
    assert!(f >= f_ref - 1e-9 * f_ref.abs());
    // feasibility at exit
    let primal = rep.history.last().unwrap();
    assert!(primal.primal <= primal.eps_pri);
}

#[test]
fn residual_history_ends_below_tolerances() {
    let data = scalar_series(44, 200);
    let spec = MeanFilterSpec::new(8.0, 1);
    let (_, rep) = mean_filter(&data, &spec, &SolverConfig::default()).unwrap();
    assert_eq!(rep.history.len(), rep.iterations);
    assert_eq!(rep.objective_trace.len(), rep.iterations);
    let last = rep.history.last().unwrap();
    assert!(last.primal <= last.eps_pri && last.dual <= last.eps_dual);
}

#[test]
fn threaded_matches_sequential_iterates() {
    let data = scalar_series(45, 300);
    let spec = MeanFilterSpec::new(6.0, 1);
    let (a, _) = mean_filter(&data, &spec, &SolverConfig::default()).unwrap();
    let threaded = SolverConfig {
        threads: 4,
        ..SolverConfig::default()
    };
    let (b, _) = mean_filter(&data, &spec, &threaded).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
}

#[test]
fn custom_problem_with_closures() {
    // Φ_i(x) = ½(x - i)², Ψ = 0: the chain is ignored and x_i = i.
    let n = 5;
    let phi = |i: usize, t: &[f64], rho: f64, out: &mut [f64]| {
        out[0] = (i as f64 + rho * t[0]) / (1.0 + rho);
        Ok(())
    };
    let psi = |_: usize, t: &[f64], _: f64, out: &mut [f64]| {
        out.copy_from_slice(t);
        Ok(())
    };
    let problem = ChainProblem::new(n, 1, phi, psi).unwrap();
    let cfg = SolverConfig {
        eps_abs: 1e-9,
        eps_rel: 1e-9,
        ..SolverConfig::default()
    };
    let rep = solve(&problem, &cfg, None).unwrap();
    for i in 0..n {
        assert!((rep.x_star.block(i)[0] - i as f64).abs() < 1e-6);
    }
}
