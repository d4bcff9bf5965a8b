//! Output formats. Floats are written with 17 significant digits so every
//! value reads back bit-exactly, and files are replaced atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Number, Value};

use crate::lab::{CoverageReport, MaeReport};
use rankest_core::simlab::{SlopeFit, TestResult};

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 ..= 1e17`.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{x:.prec$}", prec = (16 - exp).max(0) as usize);
        trim_zeros(&fixed).to_owned()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number with the same digits as [`fmt_f64`]; non-finite values
/// become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("valid JSON number"))
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Row-major `p x p` matrix as nested arrays.
pub fn matrix(values: &[f64], p: usize) -> Value {
    Value::Array(values.chunks(p).map(nums).collect())
}

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

/// `out.csv` -> `out.csv.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn coverage_csv(report: &CoverageReport) -> Vec<u8> {
    csv_bytes(
        &["n", "p", "nominal_level", "projection_id", "empirical_coverage", "mc_standard_error"],
        report.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.p.to_string(),
                fmt_f64(r.nominal_level),
                r.projection_id.to_string(),
                fmt_f64(r.empirical_coverage),
                fmt_f64(r.mc_standard_error),
            ]
        }),
    )
}

pub fn coverage_summary(report: &CoverageReport) -> Value {
    json!({
        "sd_source": CoverageReport::SD_SOURCE,
        "seed": report.seed,
        "reps": report.reps,
        "theta0": nums(&report.theta0),
        "replications_at_init": report.replications_at_init,
        "unconverged": report.unconverged,
    })
}

pub fn mae_csv(report: &MaeReport) -> Vec<u8> {
    csv_bytes(
        &["n", "p", "epsilon_multiplier", "epsilon", "mae", "used", "excluded", "sigma2_true", "status"],
        report.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.p.to_string(),
                fmt_f64(r.epsilon_multiplier),
                fmt_f64(r.epsilon),
                r.mae.map(fmt_f64).unwrap_or_default(),
                r.used.to_string(),
                r.excluded.to_string(),
                fmt_f64(r.sigma2_true),
                if r.mae.is_some() { "ok" } else { "failed" }.to_owned(),
            ]
        }),
    )
}

pub fn mae_summary(report: &MaeReport) -> Value {
    let best: Vec<Value> = report
        .config
        .grid
        .iter()
        .map(|&(n, p)| {
            json!({
                "n": n,
                "p": p,
                "best_multiplier": report.best_multiplier(n, p).map_or(Value::Null, num),
            })
        })
        .collect();
    json!({
        "truth_oracle": MaeReport::TRUTH_ORACLE,
        "excluded_share_limit": num(crate::lab::MAX_EXCLUDED_SHARE),
        "best": best,
    })
}

/// Per-`n` rows followed by a `slope` row.
pub fn rates_csv(fit: &SlopeFit) -> Vec<u8> {
    let cells = fit.cells.iter().map(|c| {
        vec![
            "rmse".to_owned(),
            c.n.to_string(),
            fmt_f64(c.rmse),
            fmt_f64(c.log_rmse_se),
        ]
    });
    let slope = std::iter::once(vec![
        "slope".to_owned(),
        String::new(),
        fmt_f64(fit.slope),
        fmt_f64(fit.std_error),
    ]);
    csv_bytes(&["row", "n", "value", "std_error"], cells.chain(slope))
}

pub fn rates_summary(fit: &SlopeFit) -> Value {
    json!({
        "slope": num(fit.slope),
        "intercept": num(fit.intercept),
        "std_error": num(fit.std_error),
    })
}

pub fn density_csv(grid: &[f64], density: &[f64]) -> Vec<u8> {
    csv_bytes(
        &["x", "density", "normal_pdf"],
        grid.iter().zip(density).map(|(&x, &d)| {
            vec![fmt_f64(x), fmt_f64(d), fmt_f64(rankest_core::stats::normal_pdf(x))]
        }),
    )
}

pub fn test_result(t: &TestResult) -> Value {
    json!({ "statistic": num(t.statistic), "p_value": num(t.p_value) })
}

/// Sidecar document: the resolved config first, then the results summary.
pub fn metadata(command: &str, config: Value, summary: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "summary": summary,
    })
}
