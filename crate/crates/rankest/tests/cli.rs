use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn rankest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankest"))
        .args(args)
        .env_remove("RANKEST_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// Binary choice data with a clear signal, plus censoring columns.
fn write_data(dir: &Path, with_censoring: bool) -> String {
    let mut text = String::from(if with_censoring { "y,x1,x2,x3,r,v\n" } else { "y,x1,x2,x3\n" });
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for _ in 0..150 {
        let (a, b, c, e) = (next(), next(), next(), next());
        let y = (a + 0.5 * b - c + 0.3 * e > 0.0) as u8;
        text.push_str(&format!("{y},{a},{b},{c}"));
        if with_censoring {
            text.push_str(&format!(",{},{}", (e > -0.3) as u8, a + 1.0));
        }
        text.push('\n');
    }
    let p = path(dir, if with_censoring { "cens.csv" } else { "data.csv" });
    fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &str) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

#[test]
fn estimate_with_covariance_and_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), false);
    let out = path(dir.path(), "fit.json");
    let o = rankest(&["estimate", "--data", &data, "--cov", "--project", "1,0", "--project", "1,1", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), out);

    let doc = read_json(&out);
    let theta: Vec<f64> = serde_json::from_value(doc["theta_hat"].clone()).unwrap();
    assert_eq!(theta.len(), 2);
    assert!(theta[0] > 0.0 && theta[1] < 0.0, "{theta:?}");
    let delta: Vec<Vec<f64>> = serde_json::from_value(doc["covariance"]["delta"].clone()).unwrap();
    let m = nalgebra::DMatrix::from_fn(2, 2, |i, j| delta[i][j]);
    assert!(m.symmetric_eigen().eigenvalues.min() >= -1e-10);
    let ci = doc["ci"].as_array().unwrap();
    assert_eq!(ci.len(), 2);
    for c in ci {
        assert!(c["lo"].as_f64().unwrap() < c["hi"].as_f64().unwrap());
    }
    assert_eq!(doc["config"]["estimator"], "mrc");

    // The echoed config reproduces the fit.
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, serde_json::to_vec(&doc["config"]).unwrap()).unwrap();
    let again = path(dir.path(), "again.json");
    let o = rankest(&["estimate", "--config", &cfg, "--out", &again]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn estimate_reports_missing_columns_and_bad_steps() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), false);
    let out = path(dir.path(), "fit.json");

    let o = rankest(&["estimate", "--data", &data, "--estimator", "kt", "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("MissingColumn r"), "{}", stderr(&o));

    let o = rankest(&["estimate", "--data", &data, "--cov", "--epsilon", "0", "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("InvalidStep"), "{}", stderr(&o));

    let o = rankest(&["estimate", "--data", &path(dir.path(), "absent.csv"), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    let o = rankest(&["estimate", "--data", &data, "--project", "1,1", "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!Path::new(&out).exists());

    let cens = write_data(dir.path(), true);
    let o = rankest(&["estimate", "--data", &cens, "--estimator", "kt", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn constant_response_has_singular_hessian() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "flat.csv");
    let mut text = String::from("y,x1,x2\n");
    for i in 0..30 {
        text.push_str(&format!("1,{},{}\n", i % 7, (i * 3) % 11));
    }
    fs::write(&data, text).unwrap();
    let o = rankest(&["estimate", "--data", &data, "--cov", "--out", &path(dir.path(), "f.json")]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

fn simulate(kind: &str, extra: &[&str], out: &str, threads: &str) -> Output {
    let mut args = vec!["--threads", threads, "simulate", kind];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out]);
    rankest(&args)
}

#[test]
fn coverage_is_reproducible_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n", "60", "--p", "2", "--reps", "80", "--seed", "9"];
    let a = path(dir.path(), "a.csv");
    let b = path(dir.path(), "b.csv");
    assert!(simulate("coverage", &args, &a, "1").status.success());
    assert!(simulate("coverage", &args, &b, "3").status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(a.clone() + ".meta.json").unwrap(), fs::read(b.clone() + ".meta.json").unwrap());

    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,p,nominal_level,projection_id,empirical_coverage,mc_standard_error"
    );
    assert_eq!(lines.count(), 30);
    let meta = read_json(&(a.clone() + ".meta.json"));
    assert_eq!(meta["summary"]["sd_source"], "simulation");
    assert_eq!(meta["config"]["seed"], 9);

    // The sidecar is a valid config for a rerun.
    let c = path(dir.path(), "c.csv");
    assert!(simulate("coverage", &["--config", &(a.clone() + ".meta.json")], &c, "2").status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn mae_guards_its_truth_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "mae.csv");
    let o = simulate("mae", &["--grid", "50:1", "--reps", "20", "--truth-reps", "10"], &out, "1");
    assert_eq!(o.status.code(), Some(3));
    assert!(!Path::new(&out).exists());

    let o = simulate("mae", &["--grid", "60:1,60:2", "--multipliers", "1.1,0.5", "--reps", "20", "--truth-reps", "40"], &out, "2");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    let meta = read_json(&(out.clone() + ".meta.json"));
    assert!(meta["summary"]["truth_oracle"].as_str().unwrap().contains("truth_reps"));
}

#[test]
fn rates_end_with_a_slope_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "rates.csv");
    let o = simulate("rates", &["--n-grid", "50,100,200", "--reps", "30"], &out, "2");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("slope,,"), "{last}");
    let slope: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(slope < 0.0);

    let o = simulate("rates", &["--n-grid", "50,100"], &out, "1");
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn density_of_standard_normal_draws() {
    let dir = tempfile::tempdir().unwrap();
    let samples = path(dir.path(), "z.csv");
    let mut rng = rankest_core::simlab::StreamRng::from_seed(4);
    let mut text = String::from("z\n");
    for _ in 0..2000 {
        text.push_str(&format!("{}\n", rng.normal()));
    }
    fs::write(&samples, text).unwrap();
    let out = path(dir.path(), "dens.csv");
    let o = rankest(&["density", "--samples", &samples, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let integral: f64 = rows.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    assert!((integral - 1.0).abs() < 0.01, "{integral}");
    let meta = read_json(&(out + ".meta.json"));
    assert!(meta["summary"]["tests"]["kolmogorov_smirnov"]["p_value"].as_f64().unwrap() > 0.01);
}

#[test]
fn density_rejects_empty_and_constant_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "dens.csv");
    let empty = path(dir.path(), "empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(rankest(&["density", "--samples", &empty, "--out", &out]).status.code(), Some(2));
    let flat = path(dir.path(), "flat.csv");
    fs::write(&flat, "3\n3\n3\n3\n").unwrap();
    let o = rankest(&["density", "--samples", &flat, "--out", &out]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("DegenerateSample"));
    assert!(!PathBuf::from(&out).exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rankest(&["simulate", "bogus"]).status.code(), Some(2));
    assert_eq!(rankest(&["estimate"]).status.code(), Some(2));
}
