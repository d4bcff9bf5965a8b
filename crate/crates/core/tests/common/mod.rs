#![allow(dead_code)]

use rankest_core::simlab::StreamRng;
use rankest_core::{Beta, EstimatorKind, EstimatorSpec, Sample};

pub fn all_specs() -> [EstimatorSpec; 4] {
    [
        EstimatorSpec::mrc(),
        EstimatorSpec::cs(-0.5, 1.0),
        EstimatorSpec::kt(),
        EstimatorSpec::as_gaussian(1.0, 0.2),
    ]
}

/// Random sample with every optional column, coarsened so that ties occur
/// in y, in the covariates and in v.
pub fn random_sample(rng: &mut StreamRng, n: usize, p: usize) -> Sample {
    let coarse = |rng: &mut StreamRng, draw: fn(&mut StreamRng) -> f64| {
        let x = draw(rng);
        if rng.uniform() < 0.3 {
            (x * 2.0).round() / 2.0
        } else {
            x
        }
    };
    let cols: Vec<Vec<f64>> = (0..=p)
        .map(|_| (0..n).map(|_| coarse(rng, StreamRng::normal)).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| coarse(rng, StreamRng::normal)).collect();
    let r: Vec<f64> = (0..n)
        .map(|_| if rng.uniform() < 0.7 { 1.0 } else { 0.0 })
        .collect();
    let v: Vec<f64> = (0..n).map(|_| coarse(rng, StreamRng::exponential)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    Sample::from_columns(y, &cols)
        .unwrap()
        .with_censoring(r, v)
        .unwrap()
        .with_conditioning(w)
        .unwrap()
}

pub fn random_theta(rng: &mut StreamRng, p: usize) -> Vec<f64> {
    (0..p).map(|_| 2.0 * rng.normal()).collect()
}

/// Kernel `f(Z_i, Z_j; β)` straight from its definition.
pub fn naive_kernel(s: &Sample, spec: &EstimatorSpec, u: &[f64], i: usize, j: usize) -> f64 {
    let y = s.y();
    match spec.kind {
        EstimatorKind::Mrc => ((y[i] > y[j]) && (u[i] > u[j])) as u8 as f64,
        EstimatorKind::Cs => {
            let m = y[i].clamp(spec.trim_lo, spec.trim_hi);
            if u[i] > u[j] {
                m
            } else {
                0.0
            }
        }
        EstimatorKind::Kt => {
            let (r, v) = (s.r().unwrap(), s.v().unwrap());
            if v[i] < v[j] && u[i] < u[j] {
                r[i]
            } else {
                0.0
            }
        }
        EstimatorKind::As => {
            let w = s.w().unwrap();
            let b = spec.bandwidth_c * (s.n() as f64).powf(-spec.bandwidth_delta);
            let d = (w[i] - w[j]) / b;
            let k = (-0.5 * d * d).exp() / (2.0 * std::f64::consts::PI).sqrt() / b;
            if y[i] > y[j] && u[i] > u[j] {
                k
            } else {
                0.0
            }
        }
    }
}

/// Naive `Σ_{i≠j} f(Z_i, Z_j) / (n(n-1))`.
pub fn naive_objective(s: &Sample, spec: &EstimatorSpec, beta: &Beta) -> f64 {
    let n = s.n();
    let u = s.index(beta);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += naive_kernel(s, spec, &u, i, j);
            }
        }
    }
    acc / (n * (n - 1)) as f64
}
