//! `tvadmm` command-line front end.
//!
//! Exit codes: 0 converged, 1 input or usage error, 2 iteration cap reached
//! without convergence (outputs are still written), 3 unbounded problem.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::admm::{SolverConfig, SolverReport};
use crate::error::Error;
use crate::filters::{
    default_segment_tol, lambda_max_mean, lambda_max_variance, mean_filter, segments, variance_filter, MeanFilterSpec,
    Penalty, TimeSeries, VarianceFilterSpec,
};
use crate::linalg::SymMatrix;
use crate::projection::BlockVector;
use crate::synth::{generate, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tvadmm",
    version,
    about = "Piecewise-constant mean and variance filtering by ADMM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// l1 mean filtering of a CSV series (one time step per row)
    Mean(MeanArgs),
    /// l1 variance filtering of a zero-mean CSV series
    Var(VarArgs),
    /// Print the smallest lambda giving a constant mean estimate
    LambdaMax(LambdaMaxArgs),
    /// Write a seeded piecewise-constant test series and its true means
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("weight").required(true).args(["lambda", "lambda_frac"])))]
struct LambdaArgs {
    /// Penalty weight
    #[arg(long)]
    lambda: Option<f64>,
    /// Penalty weight as a fraction of lambda_max computed from the input
    #[arg(long)]
    lambda_frac: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// ADMM penalty parameter (defaults to lambda)
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 1.8)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_abs: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps_rel: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Worker threads for the per-block steps (1 = sequential, reproducible)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            alpha: self.alpha,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iter: self.max_iter,
            threads: self.threads,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct MeanArgs {
    #[arg(long)]
    input: PathBuf,
    /// Estimated means, one row per time step
    #[arg(long)]
    output: PathBuf,
    /// Residual history (iter,primal,dual,eps_pri,eps_dual)
    #[arg(long)]
    residuals: PathBuf,
    /// Noise covariance as an n x n CSV (identity if omitted)
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[command(flatten)]
    weight: LambdaArgs,
    /// group | elementwise
    #[arg(long, default_value = "group")]
    penalty: Penalty,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct VarArgs {
    #[arg(long)]
    input: PathBuf,
    /// Estimated covariances, each row a row-major n x n matrix
    #[arg(long)]
    output: PathBuf,
    /// Estimated precision matrices (default: <output stem>.precision.csv)
    #[arg(long)]
    precision_output: Option<PathBuf>,
    #[arg(long)]
    residuals: PathBuf,
    #[command(flatten)]
    weight: LambdaArgs,
    /// frobenius (alias group) | elementwise
    #[arg(long, default_value = "group")]
    penalty: Penalty,
    /// Average outer products over this many samples (1 = raw samples)
    #[arg(long, default_value_t = 1)]
    window: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct LambdaMaxArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long, default_value = "group")]
    penalty: Penalty,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    n_samples: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    segments: usize,
}

/// Failure carrying the process exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unbounded(_) => EXIT_UNBOUNDED,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    input_error(format!("{}: {e}", path.display()))
}

/// Parses and runs one invocation, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Mean(a) => run_mean(&a),
        Command::Var(a) => run_var(&a),
        Command::LambdaMax(a) => run_lambda_max(&a),
        Command::Synth(a) => run_synth(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("tvadmm: {}", f.message);
            f.code
        }
    }
}

/// Reads a headerless numeric CSV into rows of equal length.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    format!(
                        "{}: line {line}, column {}: expected a finite number, found '{field}'",
                        path.display(),
                        col + 1
                    )
                })
            })
            .collect::<Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format!(
                    "{}: line {line}: expected {} columns, found {}",
                    path.display(),
                    first.len(),
                    row.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

fn read_series(path: &Path) -> Result<TimeSeries, Failure> {
    let rows = read_matrix_csv(path).map_err(input_error)?;
    Ok(TimeSeries::new(rows)?)
}

fn read_sigma(path: Option<&Path>, dim: usize) -> Result<SymMatrix, Failure> {
    let Some(path) = path else {
        return Ok(SymMatrix::identity(dim));
    };
    let rows = read_matrix_csv(path).map_err(input_error)?;
    let sigma = SymMatrix::from_rows(&rows).map_err(|e| io_error(path, e))?;
    if sigma.dim() != dim {
        return Err(input_error(format!(
            "{}: covariance is {1}x{1} but the series has dimension {dim}",
            path.display(),
            sigma.dim()
        )));
    }
    Ok(sigma)
}

/// Formats a value with 17 significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_blocks(path: &Path, blocks: &BlockVector) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    for b in blocks.blocks() {
        let line: Vec<String> = b.iter().map(|v| fmt_value(*v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn write_residuals(path: &Path, report: &SolverReport) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "iter,primal,dual,eps_pri,eps_dual").map_err(|e| io_error(path, e))?;
    for h in &report.history {
        writeln!(
            w,
            "{},{},{},{},{}",
            h.iter,
            fmt_value(h.primal),
            fmt_value(h.dual),
            fmt_value(h.eps_pri),
            fmt_value(h.eps_dual)
        )
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn print_summary(report: &SolverReport, lambda: f64, estimates: &BlockVector) {
    println!(
        "# lambda={} rho={} iterations={} converged={}",
        fmt_value(lambda),
        fmt_value(report.rho),
        report.iterations,
        report.converged
    );
    println!("start,end,level");
    for seg in segments(estimates, default_segment_tol(estimates)) {
        let level: Vec<String> = seg.level.iter().map(|v| fmt_value(*v)).collect();
        println!("{},{},{}", seg.start + 1, seg.end, level.join(","));
    }
}

fn resolve_lambda(weight: &LambdaArgs, lambda_max: impl FnOnce() -> crate::Result<f64>) -> Result<f64, Failure> {
    let lambda = match (weight.lambda, weight.lambda_frac) {
        (Some(l), _) => l,
        (None, Some(frac)) => {
            if !(frac >= 0.0 && frac.is_finite()) {
                return Err(input_error(format!("--lambda-frac must be nonnegative, got {frac}")));
            }
            frac * lambda_max()?
        }
        (None, None) => unreachable!("clap requires one of --lambda / --lambda-frac"),
    };
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(input_error(format!("lambda must be nonnegative, got {lambda}")));
    }
    Ok(lambda)
}

fn exit_for(report: &SolverReport) -> i32 {
    if report.converged {
        EXIT_OK
    } else {
        eprintln!(
            "tvadmm: no convergence after {} iterations (results written)",
            report.iterations
        );
        EXIT_NOT_CONVERGED
    }
}

fn run_mean(a: &MeanArgs) -> Result<i32, Failure> {
    let data = read_series(&a.input)?;
    let sigma = read_sigma(a.sigma.as_deref(), data.dim())?;
    let config = a.solver.config();
    config.validate()?;
    let lambda = resolve_lambda(&a.weight, || lambda_max_mean(&data, &sigma, a.penalty))?;
    let spec = MeanFilterSpec {
        lambda,
        penalty: a.penalty,
        sigma,
    };
    let (estimates, report) = mean_filter(&data, &spec, &config)?;
    write_blocks(&a.output, &estimates)?;
    write_residuals(&a.residuals, &report)?;
    print_summary(&report, lambda, &estimates);
    Ok(exit_for(&report))
}

fn default_precision_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.precision.csv"))
}

fn run_var(a: &VarArgs) -> Result<i32, Failure> {
    let data = read_series(&a.input)?;
    let config = a.solver.config();
    config.validate()?;
    let lambda = resolve_lambda(&a.weight, || lambda_max_variance(&data, a.window, a.penalty))?;
    let spec = VarianceFilterSpec {
        lambda,
        penalty: a.penalty,
        window: a.window,
    };
    let (estimate, report) = variance_filter(&data, &spec, &config)?;
    let covariance = estimate.covariance_blocks();
    write_blocks(&a.output, &covariance)?;
    let precision_path = a
        .precision_output
        .clone()
        .unwrap_or_else(|| default_precision_path(&a.output));
    write_blocks(&precision_path, &estimate.precision_blocks())?;
    write_residuals(&a.residuals, &report)?;
    print_summary(&report, lambda, &covariance);
    Ok(exit_for(&report))
}

fn run_lambda_max(a: &LambdaMaxArgs) -> Result<i32, Failure> {
    let data = read_series(&a.input)?;
    let sigma = read_sigma(a.sigma.as_deref(), data.dim())?;
    let lambda_max = lambda_max_mean(&data, &sigma, a.penalty)?;
    println!("{}", fmt_value(lambda_max));
    Ok(EXIT_OK)
}

fn run_synth(a: &SynthArgs) -> Result<i32, Failure> {
    let cfg = SynthConfig {
        n_samples: a.n_samples,
        dim: a.dim,
        segments: a.segments,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let synth = generate(&cfg)?;
    write_blocks(&a.output, synth.data.samples())?;
    write_blocks(&a.truth, &synth.truth)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_path_default() {
        assert_eq!(
            default_precision_path(Path::new("/tmp/out/cov.csv")),
            PathBuf::from("/tmp/out/cov.precision.csv")
        );
    }

    #[test]
    fn value_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(fmt_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["tvadmm", "mean", "--bogus"]), EXIT_INPUT);
        assert_eq!(run(["tvadmm"]), EXIT_INPUT);
        assert_eq!(run(["tvadmm", "frobnicate"]), EXIT_INPUT);
    }
}
