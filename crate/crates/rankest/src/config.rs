//! Run configuration: command-line flags over a JSON config file over the
//! built-in defaults. The resolved values are echoed into every output so a
//! run can be repeated from its own metadata; the `config` block of an
//! output's metadata is itself a valid config file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use rankest_core::simlab::{default_projections, DEFAULT_LEVELS, DEFAULT_MULTIPLIERS};
use rankest_core::{EstimatorSpec, DEFAULT_MAX_SWEEPS};

use crate::report::{num, nums};

#[derive(Debug)]
pub enum ConfigError {
    /// The file is missing or is not valid JSON of the right shape.
    Read(String),
    /// Values are present but unusable.
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Read(m) | ConfigError::Invalid(m) => f.write_str(m),
        }
    }
}

/// Loads a config file. A metadata sidecar is accepted too; its `config`
/// block is used.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, ConfigError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    if value.get("command").is_some() {
        value = value["config"].take();
    }
    serde_json::from_value(value).map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))
}

fn check_levels(levels: &[f64]) -> Result<(), ConfigError> {
    if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(ConfigError::Invalid("levels must lie in (0, 1)".into()));
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateFile {
    pub data: Option<PathBuf>,
    pub estimator: Option<String>,
    pub trim_lo: Option<f64>,
    pub trim_hi: Option<f64>,
    pub bandwidth_c: Option<f64>,
    pub bandwidth_delta: Option<f64>,
    pub init: Option<Vec<f64>>,
    pub max_sweeps: Option<usize>,
    pub cov: Option<bool>,
    pub epsilon: Option<f64>,
    pub project: Option<Vec<Vec<f64>>>,
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub data: PathBuf,
    pub spec: EstimatorSpec,
    /// `None` means the zero vector of the data's dimension.
    pub init: Option<Vec<f64>>,
    pub max_sweeps: usize,
    pub cov: bool,
    /// `None` means the dimension-aware default step.
    pub epsilon: Option<f64>,
    pub project: Vec<Vec<f64>>,
    pub level: f64,
}

impl EstimateFile {
    pub fn resolve(self) -> Result<EstimateConfig, ConfigError> {
        let data = self
            .data
            .ok_or_else(|| ConfigError::Invalid("--data is required".into()))?;
        let name = self.estimator.unwrap_or_else(|| "mrc".into());
        let spec = match name.as_str() {
            "mrc" => EstimatorSpec::mrc(),
            "cs" => EstimatorSpec::cs(
                self.trim_lo
                    .ok_or_else(|| ConfigError::Invalid("cs needs --trim-lo".into()))?,
                self.trim_hi
                    .ok_or_else(|| ConfigError::Invalid("cs needs --trim-hi".into()))?,
            ),
            "kt" => EstimatorSpec::kt(),
            "as" => EstimatorSpec::as_gaussian(
                self.bandwidth_c.unwrap_or(1.0),
                self.bandwidth_delta.unwrap_or(0.2),
            ),
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown estimator {other:?}; expected mrc, cs, kt or as"
                )))
            }
        };
        let level = self.level.unwrap_or(0.95);
        check_levels(&[level])?;
        let project = self.project.unwrap_or_default();
        if !project.is_empty() && !self.cov.unwrap_or(false) {
            return Err(ConfigError::Invalid("--project needs --cov".into()));
        }
        Ok(EstimateConfig {
            data,
            spec,
            init: self.init,
            max_sweeps: self.max_sweeps.unwrap_or(DEFAULT_MAX_SWEEPS),
            cov: self.cov.unwrap_or(false),
            epsilon: self.epsilon,
            project,
            level,
        })
    }
}

impl EstimateConfig {
    /// Echo with the data-dependent defaults filled in.
    pub fn to_json(&self, init: &[f64], epsilon: Option<f64>) -> Value {
        let mut v = json!({
            "data": self.data.display().to_string(),
            "estimator": self.spec.kind.name(),
        });
        let m = v.as_object_mut().expect("object");
        match self.spec.kind {
            rankest_core::EstimatorKind::Cs => {
                m.insert("trim_lo".into(), num(self.spec.trim_lo));
                m.insert("trim_hi".into(), num(self.spec.trim_hi));
            }
            rankest_core::EstimatorKind::As => {
                m.insert("bandwidth_c".into(), num(self.spec.bandwidth_c));
                m.insert("bandwidth_delta".into(), num(self.spec.bandwidth_delta));
            }
            _ => {}
        }
        m.insert("init".into(), nums(init));
        m.insert("max_sweeps".into(), json!(self.max_sweeps));
        m.insert("cov".into(), json!(self.cov));
        if let Some(e) = epsilon {
            m.insert("epsilon".into(), num(e));
        }
        m.insert(
            "project".into(),
            Value::Array(self.project.iter().map(|g| nums(g)).collect()),
        );
        m.insert("level".into(), num(self.level));
        v
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageFile {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub levels: Option<Vec<f64>>,
    pub projections: Option<Vec<Vec<f64>>>,
    pub init_at_truth: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub levels: Vec<f64>,
    pub projections: Vec<Vec<f64>>,
    pub init_at_truth: bool,
}

impl CoverageFile {
    pub fn resolve(self) -> Result<CoverageConfig, ConfigError> {
        let p = self.p.unwrap_or(1);
        let levels = self.levels.unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
        check_levels(&levels)?;
        Ok(CoverageConfig {
            n: self.n.unwrap_or(100),
            p,
            reps: self.reps.unwrap_or(1000),
            seed: self.seed.unwrap_or(1),
            levels,
            projections: self.projections.unwrap_or_else(|| default_projections(p)),
            init_at_truth: self.init_at_truth.unwrap_or(true),
        })
    }
}

impl CoverageConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "p": self.p,
            "reps": self.reps,
            "seed": self.seed,
            "levels": nums(&self.levels),
            "projections": Value::Array(self.projections.iter().map(|g| nums(g)).collect()),
            "init_at_truth": self.init_at_truth,
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaeFile {
    pub grid: Option<Vec<[usize; 2]>>,
    pub multipliers: Option<Vec<f64>>,
    pub reps: Option<usize>,
    pub truth_reps: Option<usize>,
    pub seed: Option<u64>,
}

impl MaeFile {
    pub fn resolve(self) -> Result<crate::lab::MaeConfig, ConfigError> {
        let grid = self.grid.map_or_else(
            || {
                [100, 200, 400]
                    .iter()
                    .flat_map(|&n| (1..=4).map(move |p| (n, p)))
                    .collect()
            },
            |g| g.into_iter().map(|[n, p]| (n, p)).collect(),
        );
        let reps = self.reps.unwrap_or(1000);
        let truth_reps = self.truth_reps.unwrap_or(10_000);
        if truth_reps < reps {
            return Err(ConfigError::Invalid(format!(
                "truth_reps ({truth_reps}) must be at least reps ({reps})"
            )));
        }
        Ok(crate::lab::MaeConfig {
            grid,
            multipliers: self.multipliers.unwrap_or_else(|| DEFAULT_MULTIPLIERS.to_vec()),
            reps,
            truth_reps,
            seed: self.seed.unwrap_or(1),
        })
    }
}

pub fn mae_json(cfg: &crate::lab::MaeConfig) -> Value {
    json!({
        "grid": cfg.grid.iter().map(|&(n, p)| json!([n, p])).collect::<Vec<_>>(),
        "multipliers": nums(&cfg.multipliers),
        "reps": cfg.reps,
        "truth_reps": cfg.truth_reps,
        "seed": cfg.seed,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesFile {
    pub n_grid: Option<Vec<usize>>,
    pub p: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub init_at_truth: Option<bool>,
}

impl RatesFile {
    pub fn resolve(self) -> Result<crate::lab::RateConfig, ConfigError> {
        let mut cfg = crate::lab::RateConfig::new(
            self.n_grid.unwrap_or_else(|| vec![100, 200, 400, 800]),
            self.p.unwrap_or(1),
            self.reps.unwrap_or(200),
            self.seed.unwrap_or(1),
        );
        cfg.init_at_truth = self.init_at_truth.unwrap_or(true);
        Ok(cfg)
    }
}

pub fn rates_json(cfg: &crate::lab::RateConfig) -> Value {
    json!({
        "estimator": cfg.estimator.kind.name(),
        "n_grid": cfg.n_grid,
        "p": cfg.p,
        "reps": cfg.reps,
        "seed": cfg.seed,
        "init_at_truth": cfg.init_at_truth,
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub samples: Option<PathBuf>,
}

/// Parses `"1,2.5,-3"`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse {t:?} as a number"))
        })
        .collect()
}

/// Parses `"100:1,400:4"`.
pub fn parse_grid(text: &str) -> Result<Vec<[usize; 2]>, String> {
    text.split(',')
        .map(|cell| {
            let (n, p) = cell
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("grid cell {cell:?} is not n:p"))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("grid cell {cell:?} is not n:p"))
            };
            Ok([parse(n)?, parse(p)?])
        })
        .collect()
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("cannot parse {t:?} as a count"))
        })
        .collect()
}
