//! Parallel Monte Carlo drivers.
//!
//! Every replication draws from its own stream, keyed by the master seed,
//! the experiment, the `(n, p)` cell and the replication index. Results land
//! in replication-indexed slots and are reduced in index order, so output
//! does not depend on the number of worker threads.

use std::fmt;

use rankest_core::simlab::{
    coverage_rows, default_projections, generate_binary_choice_with, median_absolute_error,
    rmse, rng::cell_id, slope_fit, unit_diagonal_direction, CoverageRow, DgpConfig, Purpose,
    RateCell, SlopeFit, StreamRng, DEFAULT_LEVELS, DEFAULT_MULTIPLIERS,
};
use rankest_core::stats::{mean, sample_sd};
use rankest_core::{
    default_step_n_only, estimate_covariance, fit, EstimatorSpec, FitOptions, FitResult, Sample,
};
use rayon::prelude::*;

/// Largest share of singular-Hessian replications a MAE cell may drop.
pub const MAX_EXCLUDED_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum LabError {
    Core(rankest_core::Error),
    Config(String),
    /// The design cannot say anything about the question asked.
    Degenerate(String),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Degenerate(m) => write!(f, "degenerate design: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<rankest_core::Error> for LabError {
    fn from(e: rankest_core::Error) -> Self {
        LabError::Core(e)
    }
}

pub type LabResult<T> = Result<T, LabError>;

/// Sample generator: `(config, stream) -> (sample, θ₀)`.
pub type Generator =
    dyn Fn(&DgpConfig, &mut StreamRng) -> rankest_core::Result<(Sample, Vec<f64>)> + Sync;

fn binary_choice(cfg: &DgpConfig, rng: &mut StreamRng) -> rankest_core::Result<(Sample, Vec<f64>)> {
    generate_binary_choice_with(cfg, rng)
}

/// Runs `job(r)` for `r in 0..reps` and returns the results in index order.
/// On failure the error of the lowest failing replication is returned.
fn replicate<T: Send>(
    reps: usize,
    job: impl Fn(u64) -> LabResult<T> + Sync + Send,
) -> LabResult<Vec<T>> {
    let slots: Vec<LabResult<T>> = (0..reps as u64).into_par_iter().map(job).collect();
    slots.into_iter().collect()
}

struct Replication {
    fit: FitResult,
    init: Vec<f64>,
    theta0: Vec<f64>,
    n: usize,
}

fn fit_replication(
    cfg: &DgpConfig,
    spec: &EstimatorSpec,
    purpose: Purpose,
    rep: u64,
    init_at_truth: bool,
    generator: &Generator,
) -> LabResult<Replication> {
    let mut rng = StreamRng::new(cfg.seed, purpose, cell_id(cfg.n, cfg.p), rep);
    let (sample, theta0) = generator(cfg, &mut rng)?;
    let init = if init_at_truth {
        theta0.clone()
    } else {
        vec![0.0; cfg.p]
    };
    let fit = fit(&sample, spec, &FitOptions::new(init.clone()))?;
    Ok(Replication {
        fit,
        init,
        theta0,
        n: sample.n(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub dgp: DgpConfig,
    pub reps: usize,
    pub estimator: EstimatorSpec,
    pub projections: Vec<Vec<f64>>,
    pub nominal_levels: Vec<f64>,
    pub init_at_truth: bool,
}

impl MonteCarloConfig {
    /// The binary choice design with the default directions and levels, MRC
    /// started at the truth.
    pub fn binary_choice(n: usize, p: usize, reps: usize, seed: u64) -> Self {
        Self {
            dgp: DgpConfig::new(n, p, seed),
            reps,
            estimator: EstimatorSpec::mrc(),
            projections: default_projections(p),
            nominal_levels: DEFAULT_LEVELS.to_vec(),
            init_at_truth: true,
        }
    }

    fn check(&self) -> LabResult<()> {
        if self.reps < 2 {
            return Err(LabError::Config("reps must be at least 2".into()));
        }
        if self.projections.is_empty() {
            return Err(LabError::Config("at least one projection is required".into()));
        }
        for g in &self.projections {
            if g.len() != self.dgp.p || g.iter().all(|&v| v == 0.0) {
                return Err(LabError::Config(format!(
                    "projections must be nonzero vectors of length {}",
                    self.dgp.p
                )));
            }
        }
        if self.nominal_levels.is_empty()
            || self.nominal_levels.iter().any(|l| !(*l > 0.0 && *l < 1.0))
        {
            return Err(LabError::Config("nominal levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
    pub seed: u64,
    pub reps: usize,
    pub theta0: Vec<f64>,
    /// `θ̂_r` in replication order.
    pub estimates: Vec<Vec<f64>>,
    pub replications_at_init: usize,
    pub unconverged: usize,
}

impl CoverageReport {
    pub const SD_SOURCE: &'static str = "simulation";

    /// `(γ'θ̂_r - γ'θ₀) / s_γ` for every replication.
    pub fn normalized(&self, gamma: &[f64]) -> Vec<f64> {
        let dot = |a: &[f64]| a.iter().zip(gamma).map(|(x, g)| x * g).sum::<f64>();
        let proj: Vec<f64> = self.estimates.iter().map(|e| dot(e)).collect();
        let sd = sample_sd(&proj);
        let center = dot(&self.theta0);
        proj.iter().map(|v| (v - center) / sd).collect()
    }
}

pub fn run_coverage(cfg: &MonteCarloConfig) -> LabResult<CoverageReport> {
    run_coverage_with(cfg, &binary_choice)
}

pub fn run_coverage_with(cfg: &MonteCarloConfig, generator: &Generator) -> LabResult<CoverageReport> {
    cfg.check()?;
    let reps = replicate(cfg.reps, |r| {
        fit_replication(&cfg.dgp, &cfg.estimator, Purpose::Coverage, r, cfg.init_at_truth, generator)
    })?;
    let theta0 = reps[0].theta0.clone();
    let estimates: Vec<Vec<f64>> = reps.iter().map(|r| r.fit.theta_hat.clone()).collect();
    let rows = coverage_rows(
        reps[0].n,
        &estimates,
        &theta0,
        &cfg.projections,
        &cfg.nominal_levels,
    )?;
    Ok(CoverageReport {
        rows,
        seed: cfg.dgp.seed,
        reps: cfg.reps,
        theta0,
        replications_at_init: reps.iter().filter(|r| r.fit.theta_hat == r.init).count(),
        unconverged: reps.iter().filter(|r| !r.fit.converged).count(),
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaeConfig {
    pub grid: Vec<(usize, usize)>,
    pub multipliers: Vec<f64>,
    pub reps: usize,
    pub truth_reps: usize,
    pub seed: u64,
}

impl MaeConfig {
    pub fn new(grid: Vec<(usize, usize)>, reps: usize, truth_reps: usize, seed: u64) -> Self {
        Self {
            grid,
            multipliers: DEFAULT_MULTIPLIERS.to_vec(),
            reps,
            truth_reps,
            seed,
        }
    }

    fn check(&self) -> LabResult<()> {
        if self.grid.is_empty() {
            return Err(LabError::Config("grid is empty".into()));
        }
        if let Some(&(n, p)) = self.grid.iter().find(|&&(n, p)| n < 2 || p == 0) {
            return Err(LabError::Config(format!("invalid grid cell {n}:{p}")));
        }
        if self.multipliers.is_empty() || self.multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(LabError::Config("multipliers must be positive".into()));
        }
        if self.reps < 2 {
            return Err(LabError::Config("reps must be at least 2".into()));
        }
        if self.truth_reps < self.reps {
            return Err(LabError::Config(format!(
                "truth_reps ({}) must be at least reps ({})",
                self.truth_reps, self.reps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaeRow {
    pub n: usize,
    pub p: usize,
    pub epsilon_multiplier: f64,
    pub epsilon: f64,
    /// `None` when the cell failed.
    pub mae: Option<f64>,
    pub used: usize,
    pub excluded: usize,
    /// `n Var(γ'θ̂)` over the truth run.
    pub sigma2_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaeReport {
    pub rows: Vec<MaeRow>,
    pub config: MaeConfig,
}

impl MaeReport {
    pub const TRUTH_ORACLE: &'static str = "sigma2_true = n * Var(gamma' theta_hat) over truth_reps independent fits started at the truth, gamma = (p^-1/2, ..., p^-1/2)";

    /// Multiplier with the smallest MAE in the `(n, p)` cell; ties go to the
    /// first listed.
    pub fn best_multiplier(&self, n: usize, p: usize) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n && r.p == p)
            .filter_map(|r| r.mae.map(|m| (r.epsilon_multiplier, m)))
            .fold(None, |best: Option<(f64, f64)>, (c, m)| match best {
                Some((_, bm)) if bm <= m => best,
                _ => Some((c, m)),
            })
            .map(|(c, _)| c)
    }
}

pub fn run_mae(cfg: &MaeConfig) -> LabResult<MaeReport> {
    cfg.check()?;
    let spec = EstimatorSpec::mrc();
    let mut rows = Vec::new();
    for &(n, p) in &cfg.grid {
        let dgp = DgpConfig::new(n, p, cfg.seed);
        let gamma = unit_diagonal_direction(p);
        let project = |t: &[f64]| t.iter().zip(&gamma).map(|(a, b)| a * b).sum::<f64>();

        let truth = replicate(cfg.truth_reps, |r| {
            let rep = fit_replication(&dgp, &spec, Purpose::MaeTruth, r, true, &binary_choice)?;
            Ok(project(&rep.fit.theta_hat))
        })?;
        let sigma2_true = n as f64 * sample_sd(&truth).powi(2);

        let steps: Vec<f64> = cfg
            .multipliers
            .iter()
            .map(|&m| default_step_n_only(n, m))
            .collect::<Result<_, _>>()?;
        // variances[r][m] is None for a singular Hessian.
        let variances = replicate(cfg.reps, |r| {
            let mut rng = StreamRng::new(cfg.seed, Purpose::MaeReplication, cell_id(n, p), r);
            let (sample, theta0) = generate_binary_choice_with(&dgp, &mut rng)?;
            let theta = fit(&sample, &spec, &FitOptions::new(theta0))?.theta_hat;
            steps
                .iter()
                .map(|&eps| match estimate_covariance(&sample, &spec, &theta, eps) {
                    Ok(cov) => Ok(Some(cov.quadratic_form(&gamma))),
                    Err(rankest_core::Error::SingularHessian { .. }) => Ok(None),
                    Err(e) => Err(e.into()),
                })
                .collect::<LabResult<Vec<Option<f64>>>>()
        })?;

        for (m, (&mult, &eps)) in cfg.multipliers.iter().zip(&steps).enumerate() {
            let kept: Vec<f64> = variances.iter().filter_map(|v| v[m]).collect();
            let excluded = cfg.reps - kept.len();
            let failed = kept.is_empty() || excluded as f64 > MAX_EXCLUDED_SHARE * cfg.reps as f64;
            rows.push(MaeRow {
                n,
                p,
                epsilon_multiplier: mult,
                epsilon: eps,
                mae: (!failed).then(|| median_absolute_error(&kept, sigma2_true)),
                used: kept.len(),
                excluded,
                sigma2_true,
            });
        }
    }
    Ok(MaeReport {
        rows,
        config: cfg.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub estimator: EstimatorSpec,
    pub n_grid: Vec<usize>,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub init_at_truth: bool,
}

impl RateConfig {
    pub fn new(n_grid: Vec<usize>, p: usize, reps: usize, seed: u64) -> Self {
        Self {
            estimator: EstimatorSpec::mrc(),
            n_grid,
            p,
            reps,
            seed,
            init_at_truth: true,
        }
    }

    fn check(&self) -> LabResult<()> {
        if self.n_grid.len() < 3 {
            return Err(LabError::Config("n grid needs at least three points".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) || self.n_grid[0] < 2 {
            return Err(LabError::Config("n grid must be increasing and start at 2 or more".into()));
        }
        if self.p == 0 {
            return Err(LabError::Config("p must be at least 1".into()));
        }
        if self.reps < 2 {
            return Err(LabError::Config("reps must be at least 2".into()));
        }
        Ok(())
    }
}

pub fn run_rate_check(cfg: &RateConfig) -> LabResult<SlopeFit> {
    run_rate_check_with(cfg, &binary_choice)
}

/// Log–log RMSE slope over `cfg.n_grid`. Fails with
/// [`LabError::Degenerate`] when every fit in every cell stayed at its
/// starting point, which means the objective carried no information.
pub fn run_rate_check_with(cfg: &RateConfig, generator: &Generator) -> LabResult<SlopeFit> {
    cfg.check()?;
    let mut cells: Vec<RateCell> = Vec::new();
    let mut all_at_init = true;
    for &n in &cfg.n_grid {
        let dgp = DgpConfig::new(n, cfg.p, cfg.seed);
        let reps = replicate(cfg.reps, |r| {
            fit_replication(&dgp, &cfg.estimator, Purpose::Rates, r, cfg.init_at_truth, generator)
        })?;
        all_at_init &= reps.iter().all(|r| r.fit.theta_hat == r.init);
        let estimates: Vec<Vec<f64>> = reps.iter().map(|r| r.fit.theta_hat.clone()).collect();
        cells.push(rmse(n, &estimates, &reps[0].theta0));
    }
    if all_at_init {
        let level = mean(&cells.iter().map(|c| c.rmse).collect::<Vec<_>>());
        return Err(LabError::Degenerate(format!(
            "every fit returned its initial point (mean RMSE {level}); the slope would only reflect the starting values"
        )));
    }
    Ok(slope_fit(&cells)?)
}
