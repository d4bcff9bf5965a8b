//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for unreadable or malformed input, 3 for
//! input that parses but fails validation, 4 when the Hessian estimate is
//! singular. Only output paths go to stdout; diagnostics go to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rankest_core::simlab::{figure_grid, kde, normality_tests, silverman_bandwidth};
use rankest_core::{
    default_step, estimate_covariance, fit, projection_ci, Error as CoreError, FitOptions,
};

use crate::config::{self, ConfigError};
use crate::io::{read_column, read_sample, ReadError};
use crate::lab::{self, LabError, MonteCarloConfig};
use crate::report::{self, matrix, num, nums, write_atomic};

pub const EXIT_IO: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rankest", version, about = "Rank-correlation M-estimation and its Monte Carlo lab")]
struct Cli {
    /// Worker threads for simulations (default: all cores). Results do not
    /// depend on this value.
    #[arg(long, global = true, env = "RANKEST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit an estimator to a CSV dataset.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment on the binary choice design.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Kernel density and normality tests for a column of normalized
    /// estimates.
    Density(DensityArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// CSV with columns y, x1..x{p+1} and optionally r, v, w.
    #[arg(long)]
    data: Option<PathBuf>,
    /// mrc, cs, kt or as.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    trim_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    trim_hi: Option<f64>,
    #[arg(long)]
    bandwidth_c: Option<f64>,
    #[arg(long)]
    bandwidth_delta: Option<f64>,
    /// Starting point, comma separated (default: zeros).
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Also estimate the sandwich covariance.
    #[arg(long)]
    cov: bool,
    /// Finite-difference step (default: (p/n)^(1/6)).
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Direction for a confidence interval, comma separated; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    project: Vec<String>,
    /// Confidence level of the intervals.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Simulate {
    /// Coverage of normal intervals built from the simulation SD.
    Coverage(CoverageArgs),
    /// Median absolute error of the sandwich variance over step sizes.
    Mae(MaeArgs),
    /// Log-log slope of RMSE against n.
    Rates(RatesArgs),
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Nominal levels, comma separated.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the normalized projected estimates, one file per
    /// direction, to PREFIX_<id>.csv.
    #[arg(long)]
    normalized: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MaeArgs {
    /// Cells as "n1:p1,n2:p2,...".
    #[arg(long)]
    grid: Option<String>,
    /// Step multipliers c in c n^(-1/6), comma separated.
    #[arg(long)]
    multipliers: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    truth_reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RatesArgs {
    /// Sample sizes, comma separated.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// One-column CSV of normalized estimates.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::SingularHessian { .. } => EXIT_SINGULAR,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Invalid(e) => e.into(),
            other => Failure::io(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read(m) => Failure::io(m),
            ConfigError::Invalid(m) => Failure::invalid(m),
        }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Core(e) => e.into(),
            other => Failure::invalid(other.to_string()),
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn list(flag: &str, text: &Option<String>) -> Result<Option<Vec<f64>>, Failure> {
    text.as_deref()
        .map(|t| config::parse_list(t).map_err(|m| Failure::io(format!("--{flag}: {m}"))))
        .transpose()
}

/// Writes the CSV and its metadata sidecar, then prints the CSV path.
fn emit(out: &Path, csv: &[u8], meta: &Value) -> Result<(), Failure> {
    write(&report::sidecar_path(out), &report::to_json_bytes(meta))?;
    write(out, csv)?;
    println!("{}", out.display());
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let mut file: config::EstimateFile = config::load(args.config.as_deref())?;
    macro_rules! flag {
        ($($f:ident),*) => { $( if args.$f.is_some() { file.$f = args.$f.clone(); } )* };
    }
    flag!(data, estimator, trim_lo, trim_hi, bandwidth_c, bandwidth_delta, max_sweeps, epsilon, level);
    if let Some(v) = list("init", &args.init)? {
        file.init = Some(v);
    }
    if args.cov {
        file.cov = Some(true);
    }
    if !args.project.is_empty() {
        let dirs = args
            .project
            .iter()
            .map(|t| config::parse_list(t).map_err(|m| Failure::io(format!("--project: {m}"))))
            .collect::<Result<Vec<_>, _>>()?;
        file.project = Some(dirs);
    }
    let cfg = file.resolve()?;
    if let Some(e) = cfg.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            return Err(CoreError::InvalidStep(e).into());
        }
    }

    let sample = read_sample(&cfg.data)?;
    rankest_core::validate_sample(&sample, &cfg.spec)?;
    let (n, p) = (sample.n(), sample.p());
    let init = cfg.init.clone().unwrap_or_else(|| vec![0.0; p]);
    let res = fit(
        &sample,
        &cfg.spec,
        &FitOptions::new(init.clone()).with_max_sweeps(cfg.max_sweeps),
    )?;
    if !res.converged {
        eprintln!("rankest: warning: no convergence after {} sweeps", res.sweeps_used);
    }

    let mut doc = json!({
        "theta_hat": nums(&res.theta_hat),
        "objective": num(res.objective.value),
        "converged": res.converged,
        "sweeps": res.sweeps_used,
        "trace": nums(&res.trace),
    });
    let mut epsilon = None;
    if cfg.cov {
        let eps = match cfg.epsilon {
            Some(e) => e,
            None => default_step(n, p, 1.0)?,
        };
        epsilon = Some(eps);
        let cov = estimate_covariance(&sample, &cfg.spec, &res.theta_hat, eps)?;
        doc["covariance"] = json!({
            "delta": matrix(&cov.delta_hat, p),
            "v": matrix(&cov.v_hat, p),
            "sandwich": matrix(&cov.sandwich, p),
            "epsilon": num(cov.epsilon),
            "v_condition": num(cov.v_condition),
            "v_asymmetry": num(cov.v_asymmetry),
        });
        let mut cis = Vec::new();
        for gamma in &cfg.project {
            let (lo, hi) = projection_ci(&res.theta_hat, &cov, gamma, n, cfg.level)?;
            cis.push(json!({
                "projection": nums(gamma),
                "level": num(cfg.level),
                "lo": num(lo),
                "hi": num(hi),
            }));
        }
        doc["ci"] = Value::Array(cis);
    }
    doc["config"] = cfg.to_json(&init, epsilon);
    write(&args.out, &report::to_json_bytes(&doc))?;
    println!("{}", args.out.display());
    Ok(())
}

fn coverage(args: CoverageArgs) -> Result<(), Failure> {
    let mut file: config::CoverageFile = config::load(args.config.as_deref())?;
    if args.p.is_some() && args.p != file.p {
        // The default directions follow p; stale ones from a file would not fit.
        file.projections = None;
    }
    file.n = args.n.or(file.n);
    file.p = args.p.or(file.p);
    file.reps = args.reps.or(file.reps);
    file.seed = args.seed.or(file.seed);
    if let Some(l) = list("levels", &args.levels)? {
        file.levels = Some(l);
    }
    let cfg = file.resolve()?;
    let mc = MonteCarloConfig {
        projections: cfg.projections.clone(),
        nominal_levels: cfg.levels.clone(),
        init_at_truth: cfg.init_at_truth,
        ..MonteCarloConfig::binary_choice(cfg.n, cfg.p, cfg.reps, cfg.seed)
    };
    eprintln!("rankest: coverage n={} p={} reps={}", cfg.n, cfg.p, cfg.reps);
    let rep = lab::run_coverage(&mc)?;
    if rep.unconverged > 0 {
        eprintln!("rankest: warning: {} replications hit the sweep limit", rep.unconverged);
    }
    if let Some(prefix) = &args.normalized {
        for (id, gamma) in cfg.projections.iter().enumerate() {
            let mut path = prefix.as_os_str().to_owned();
            path.push(format!("_{id}.csv"));
            let mut body = String::from("normalized\n");
            for v in rep.normalized(gamma) {
                body.push_str(&report::fmt_f64(v));
                body.push('\n');
            }
            write(Path::new(&path), body.as_bytes())?;
        }
    }
    let meta = report::metadata("simulate coverage", cfg.to_json(), report::coverage_summary(&rep));
    emit(&args.out, &report::coverage_csv(&rep), &meta)
}

fn mae(args: MaeArgs) -> Result<(), Failure> {
    let mut file: config::MaeFile = config::load(args.config.as_deref())?;
    if let Some(g) = &args.grid {
        file.grid = Some(config::parse_grid(g).map_err(|m| Failure::io(format!("--grid: {m}")))?);
    }
    if let Some(m) = list("multipliers", &args.multipliers)? {
        file.multipliers = Some(m);
    }
    file.reps = args.reps.or(file.reps);
    file.truth_reps = args.truth_reps.or(file.truth_reps);
    file.seed = args.seed.or(file.seed);
    let cfg = file.resolve()?;
    eprintln!(
        "rankest: mae over {} cells, reps={} truth_reps={}",
        cfg.grid.len(),
        cfg.reps,
        cfg.truth_reps
    );
    let rep = lab::run_mae(&cfg)?;
    for r in rep.rows.iter().filter(|r| r.mae.is_none()) {
        eprintln!(
            "rankest: warning: cell n={} p={} c={} failed ({} of {} replications singular)",
            r.n,
            r.p,
            r.epsilon_multiplier,
            r.excluded,
            cfg.reps
        );
    }
    let meta = report::metadata("simulate mae", config::mae_json(&cfg), report::mae_summary(&rep));
    emit(&args.out, &report::mae_csv(&rep), &meta)
}

fn rates(args: RatesArgs) -> Result<(), Failure> {
    let mut file: config::RatesFile = config::load(args.config.as_deref())?;
    if let Some(g) = &args.n_grid {
        file.n_grid =
            Some(config::parse_usize_list(g).map_err(|m| Failure::io(format!("--n-grid: {m}")))?);
    }
    file.p = args.p.or(file.p);
    file.reps = args.reps.or(file.reps);
    file.seed = args.seed.or(file.seed);
    let cfg = file.resolve()?;
    eprintln!("rankest: rates n={:?} p={} reps={}", cfg.n_grid, cfg.p, cfg.reps);
    let fit = lab::run_rate_check(&cfg)?;
    let meta = report::metadata("simulate rates", config::rates_json(&cfg), report::rates_summary(&fit));
    emit(&args.out, &report::rates_csv(&fit), &meta)
}

fn density(args: DensityArgs) -> Result<(), Failure> {
    let mut file: config::DensityFile = config::load(args.config.as_deref())?;
    if args.samples.is_some() {
        file.samples = args.samples.clone();
    }
    let path = file
        .samples
        .ok_or_else(|| Failure::invalid("--samples is required"))?;
    let values = read_column(&path)?;
    let grid = figure_grid();
    let dens = kde(&values, &grid)?;
    let tests = normality_tests(&values)?;
    let summary = json!({
        "count": values.len(),
        "bandwidth": num(silverman_bandwidth(&values)?),
        "tests": tests.iter().map(|(k, t)| ((*k).to_owned(), report::test_result(t))).collect::<serde_json::Map<_, _>>(),
    });
    let meta = report::metadata(
        "density",
        json!({ "samples": path.display().to_string() }),
        summary,
    );
    emit(&args.out, &report::density_csv(&grid, &dens), &meta)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(Simulate::Coverage(a)) => coverage(a),
        Command::Simulate(Simulate::Mae(a)) => mae(a),
        Command::Simulate(Simulate::Rates(a)) => rates(a),
        Command::Density(a) => density(a),
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("rankest: error: {}", f.message);
            f.code
        }
    }
}
