//! Kolmogorov–Smirnov (against the standard normal) and Jarque–Bera tests.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::{mean, normal_cdf, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= λ) = sqrt(2π)/λ Σ exp(-(2k-1)² π² / (8λ²))
        let c = -core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            cdf += libm::exp(c * m * m);
        }
        let cdf = libm::sqrt(2.0 * core::f64::consts::PI) / lambda * cdf;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
            sf += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

fn check(samples: &[f64], min: usize) -> Result<()> {
    if samples.len() < min || samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSample);
    }
    Ok(())
}

/// One-sample KS test against `N(0, 1)` with the asymptotic p-value of
/// `sqrt(m) D`.
pub fn ks_normal(samples: &[f64]) -> Result<TestResult> {
    check(samples, 2)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample);
    }
    let m = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max);
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(libm::sqrt(m) * d),
    })
}

/// `JB = m/6 (S² + (K-3)²/4)` with a chi-square(2) p-value.
pub fn jarque_bera(samples: &[f64]) -> Result<TestResult> {
    check(samples, 3)?;
    let m = samples.len() as f64;
    let mu = mean(samples);
    let dev = |k: i32| -> f64 {
        let t: Vec<f64> = samples.iter().map(|x| libm::pow(x - mu, k as f64)).collect();
        pairwise_sum(&t) / m
    };
    let m2 = dev(2);
    if !(m2 > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let skew = dev(3) / libm::pow(m2, 1.5);
    let kurt = dev(4) / (m2 * m2);
    let jb = m / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    Ok(TestResult {
        statistic: jb,
        p_value: libm::exp(-0.5 * jb),
    })
}

/// Both tests keyed by name (`"jarque_bera"`, `"kolmogorov_smirnov"`).
pub fn normality_tests(samples: &[f64]) -> Result<BTreeMap<&'static str, TestResult>> {
    let mut out = BTreeMap::new();
    out.insert("kolmogorov_smirnov", ks_normal(samples)?);
    out.insert("jarque_bera", jarque_bera(samples)?);
    Ok(out)
}
