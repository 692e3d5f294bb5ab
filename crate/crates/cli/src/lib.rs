//! Command-line front end: approximation runs, bound tables, Monte Carlo
//! checks of the bounds and eigenvalues from the linearization.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use sketchaaa::aaa::Termination;
use sketchaaa::analysis::{
    bound_overestimate, bound_underestimate, empirical_success_table, residual_matrix, tensor_bound_overestimate,
    tensor_bound_underestimate, BoundQuery, EmpiricalStats,
};
use sketchaaa::driver::{approximate, run_report, Method, RunOptions};
use sketchaaa::kernel::{derive_seed, singular_values};
use sketchaaa::linearize::{build_pencil, pencil_eigenvalues};
use sketchaaa::model::DomainSpec;
use sketchaaa::problems::{builtin, Problem, ProblemFile};
use sketchaaa::sketch::Field;
use sketchaaa::{CMatrix, Error, C64};

pub const THREADS_ENV: &str = "SKETCHAAA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sketchaaa", version, about = "Rational approximation of large vector- and matrix-valued functions")]
pub struct Cli {
    /// Upper bound on worker threads
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate a problem and write a JSON report
    Approximate(ApproximateArgs),
    /// Print sketching failure bounds
    Bounds(BoundsArgs),
    /// Monte Carlo success rates of the sketched error estimate
    Empirical(EmpiricalArgs),
    /// Eigenvalues of the linearized approximant
    Eig(EigArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// `builtin:<name>` or a path to a problem file
    #[arg(long)]
    pub problem: String,
    /// Matrix dimension of a built-in problem
    #[arg(long)]
    pub size: Option<usize>,
    /// Seed of the random data inside a built-in problem
    #[arg(long, default_value_t = 0)]
    pub problem_seed: u64,
}

#[derive(Debug, Args)]
pub struct ApproximateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "sketch-full")]
    pub mode: String,
    #[arg(long, default_value_t = 4)]
    pub ell: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub reltol: f64,
    #[arg(long, default_value_t = 100)]
    pub dmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "complex")]
    pub field: String,
    /// Number of realizations to average
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Evaluate the problem on the grid before timing
    #[arg(long)]
    pub precompute: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration history as CSV
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub ell: Vec<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value = "complex")]
    pub field: String,
    /// Single tensorized probe bounds
    #[arg(long)]
    pub tensor: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub ell: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10")]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "complex")]
    pub field: String,
    /// Tolerance of the run that fixes the approximant
    #[arg(long, default_value_t = 1e-6)]
    pub reltol: f64,
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub reltol: f64,
    #[arg(long, default_value_t = 4)]
    pub ell: usize,
    #[arg(long, default_value_t = 100)]
    pub dmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `disc:re,im,r`, `halfdisc:re,im,r` or `interval:a,b`; defaults to the
    /// problem domain
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::WeightDegeneracy { .. }
            | Error::Pole { .. }
            | Error::NonFiniteTerm { .. }
            | Error::NonFiniteValue { .. }
            | Error::DegenerateResidual
            | Error::UndefinedRank => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_problem(p: &ProblemArgs) -> CliResult<Problem> {
    match p.problem.strip_prefix("builtin:") {
        Some(name) => Ok(builtin(name, p.size, p.problem_seed)?),
        None => {
            if p.size.is_some() {
                return Err(CliError::Usage("--size applies to built-in problems only".into()));
            }
            Ok(ProblemFile::load(Path::new(&p.problem))?.into_problem()?)
        }
    }
}

fn parse_field(s: &str) -> CliResult<Field> {
    s.parse::<Field>().map_err(|e| CliError::Usage(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            std::io::stdout().flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn parse_numbers(s: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad {what} region: {e}")))?;
    if v.len() != n {
        return Err(CliError::Usage(format!("{what} region takes {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

pub fn parse_region(s: &str) -> CliResult<DomainSpec> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("bad region '{s}'")))?;
    let d = match kind {
        "disc" => {
            let v = parse_numbers(rest, 3, kind)?;
            DomainSpec::disc(C64::new(v[0], v[1]), v[2])
        }
        "halfdisc" => {
            let v = parse_numbers(rest, 3, kind)?;
            DomainSpec::half_disc(C64::new(v[0], v[1]), v[2])
        }
        "interval" => {
            let v = parse_numbers(rest, 2, kind)?;
            DomainSpec::interval(v[0], v[1])
        }
        _ => return Err(CliError::Usage(format!("unknown region kind '{kind}'"))),
    };
    d.validate()?;
    Ok(d)
}

pub fn cmd_approximate(a: &ApproximateArgs) -> CliResult<i32> {
    let method: Method = a.mode.parse()?;
    let problem = load_problem(&a.problem)?;
    let grid = problem.make_grid()?;
    let opts = RunOptions::new(method, a.ell, a.reltol, a.seed)
        .with_dmax(a.dmax)
        .with_field(parse_field(&a.field)?)
        .with_precompute(a.precompute);
    let report = run_report(&problem.name, &problem.function, &grid, &opts, a.repeat)?;
    write_file(&a.out, &report.to_json())?;
    if let Some(h) = &a.history {
        write_file(h, &report.history_csv())?;
    }
    eprintln!(
        "{}: degree {} relerr {:.3e} ({:?})",
        method, report.degree, report.relerr.entrywise_max, report.terminated_by
    );
    Ok(if report.terminated_by == Termination::Tolerance { 0 } else { 2 })
}

pub fn cmd_bounds(a: &BoundsArgs) -> CliResult<i32> {
    let mut out = String::new();
    if a.tensor {
        out.push_str("tau,under,over\n");
        for &tau in &a.tau {
            let u = tensor_bound_underestimate(tau)?;
            let o = tensor_bound_overestimate(tau)?;
            writeln!(out, "{tau},{u:.6e},{o:.6e}").unwrap();
        }
    } else {
        let rho = a.rho.ok_or_else(|| CliError::Usage("--rho is required".into()))?;
        if a.ell.is_empty() {
            return Err(CliError::Usage("--ell is required".into()));
        }
        let field = parse_field(&a.field)?;
        out.push_str("tau,ell,under,over\n");
        for &tau in &a.tau {
            for &ell in &a.ell {
                let q = BoundQuery::new(tau, ell, rho, field)?;
                let u = bound_underestimate(&q)?;
                let o = bound_overestimate(&q)?;
                writeln!(out, "{tau},{ell},{u:.6e},{o:.6e}").unwrap();
            }
        }
    }
    print!("{out}");
    if let Some(p) = &a.csv {
        write_file(p, &out)?;
    }
    Ok(0)
}

pub fn empirical_csv(rows: &[EmpiricalStats]) -> String {
    let mut out = String::from("tau,ell,rho,samples,p_under,p_over,p_both,bound_under,bound_over,bound_both\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.tau, r.ell, r.rho, r.n_samples, r.p_under, r.p_over, r.p_both, r.bound_under, r.bound_over, r.bound_both
        )
        .unwrap();
    }
    out
}

pub fn cmd_empirical(a: &EmpiricalArgs) -> CliResult<i32> {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let field = parse_field(&a.field)?;
    let problem = load_problem(&a.problem)?;
    let grid = problem.make_grid()?;
    // the approximant is fixed by its own probe, independent of the samples
    let fixed_seed = derive_seed(a.seed, u64::MAX);
    let fixed = approximate(&problem.function, &grid, &RunOptions::new(Method::SketchFull, 4, a.reltol, fixed_seed))?;
    let h = residual_matrix(&problem.function, &fixed.model, &grid)?;
    let rows = empirical_success_table(&h, &a.ell, &a.tau, a.samples, a.seed, field)?;
    let text = match a.format.as_str() {
        "csv" => empirical_csv(&rows),
        "json" => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        other => return Err(CliError::Usage(format!("unknown format '{other}'"))),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub lambda: C64,
    /// `sigma_min(R(lambda)) / ||R(lambda)||_2`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub problem: String,
    pub degree: usize,
    pub region: DomainSpec,
    pub eigenvalues: Vec<EigenEntry>,
}

pub fn cmd_eig(a: &EigArgs) -> CliResult<i32> {
    let problem = load_problem(&a.problem)?;
    let (m, n) = problem.function.matrix_shape().unwrap_or((problem.function.dim(), 1));
    if m != n {
        return Err(CliError::Usage(format!("eigenvalues need a square problem, got {m}x{n}")));
    }
    let region = match &a.region {
        Some(r) => parse_region(r)?,
        None => problem.domain.clone(),
    };
    let grid = problem.make_grid()?;
    let opts = RunOptions::new(Method::SketchFull, a.ell, a.reltol, a.seed).with_dmax(a.dmax);
    let fit = approximate(&problem.function, &grid, &opts)?;
    let pencil = build_pencil(&fit.model, n, None)?;
    let mut eigenvalues = Vec::new();
    for lambda in pencil_eigenvalues(&pencil, &region)? {
        let r = CMatrix::from_column_slice(n, n, fit.model.eval(lambda)?.as_slice());
        let s = singular_values(&r);
        let residual = if s[0] > 0.0 { s[s.len() - 1] / s[0] } else { 0.0 };
        eigenvalues.push(EigenEntry { lambda, residual });
    }
    let report = EigReport {
        problem: problem.name,
        degree: fit.model.degree(),
        region,
        eigenvalues,
    };
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    Ok(0)
}

pub fn execute(cli: &Cli) -> CliResult<i32> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    match &cli.command {
        Command::Approximate(a) => cmd_approximate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Empirical(a) => cmd_empirical(a),
        Command::Eig(a) => cmd_eig(a),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions() {
        assert_eq!(parse_region("disc:0,1,2").unwrap(), DomainSpec::disc(C64::new(0.0, 1.0), 2.0));
        assert_eq!(parse_region("interval:-1,1").unwrap(), DomainSpec::interval(-1.0, 1.0));
        assert!(parse_region("disc:0,1").is_err());
        assert!(parse_region("square:0,1,2").is_err());
        assert!(parse_region("disc:0,0,-1").is_err());
    }

    #[test]
    fn error_codes() {
        let e: CliError = Error::WeightDegeneracy { index: 2, magnitude: 0.0 }.into();
        assert_eq!(e.code(), 3);
        let e: CliError = Error::UnknownProblem("x".into()).into();
        assert_eq!(e.code(), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["sketchaaa", "bounds", "--tau", "1.0", "--ell", "1", "--rho", "2"]), 1);
        assert_eq!(run(["sketchaaa", "frobnicate"]), 1);
        assert_eq!(run(["sketchaaa", "--threads", "0", "bounds", "--tau", "2", "--tensor"]), 1);
    }
}
