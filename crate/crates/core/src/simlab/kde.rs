//! Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::{normal_pdf, pairwise_sum, quantile_sorted, sample_sd};

/// `0.9 min(s, IQR/1.34) m^{-1/5}`. Falls back to `s` when the IQR is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSample);
    }
    let s = sample_sd(samples);
    if !(s > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { s.min(iqr / 1.34) } else { s };
    Ok(0.9 * spread * libm::pow(samples.len() as f64, -0.2))
}

/// Density estimate at every grid point.
pub fn kde(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let h = silverman_bandwidth(samples)?;
    let scale = 1.0 / (samples.len() as f64 * h);
    let mut terms = Vec::with_capacity(samples.len());
    Ok(grid
        .iter()
        .map(|&x| {
            terms.clear();
            terms.extend(samples.iter().map(|&s| normal_pdf((x - s) / h)));
            pairwise_sum(&terms) * scale
        })
        .collect())
}

/// 201 equally spaced points on `[-4, 4]`.
pub fn figure_grid() -> Vec<f64> {
    (0..=200).map(|i| -4.0 + 0.04 * i as f64).collect()
}
