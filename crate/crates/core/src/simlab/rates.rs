//! Log–log convergence-rate fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::mean;

/// Squared-error summary of one sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCell {
    pub n: usize,
    /// `sqrt(mean_r ‖θ̂_r - θ₀‖²)`.
    pub rmse: f64,
    /// Monte Carlo standard error of `log rmse` (delta method).
    pub log_rmse_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Monte Carlo standard error of the slope.
    pub std_error: f64,
    pub cells: Vec<RateCell>,
}

/// RMSE over replications and the delta-method SE of its logarithm,
/// `sd(e_r) / (2 sqrt(R) mean(e_r))` with `e_r = ‖θ̂_r - θ₀‖²`.
pub fn rmse(n: usize, estimates: &[Vec<f64>], theta0: &[f64]) -> RateCell {
    let sq: Vec<f64> = estimates
        .iter()
        .map(|e| e.iter().zip(theta0).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let mse = mean(&sq);
    let reps = sq.len() as f64;
    let var = if sq.len() > 1 {
        sq.iter().map(|e| (e - mse) * (e - mse)).sum::<f64>() / (reps - 1.0)
    } else {
        0.0
    };
    RateCell {
        n,
        rmse: libm::sqrt(mse),
        log_rmse_se: libm::sqrt(var / reps) / (2.0 * mse),
    }
}

/// Least-squares slope of `log rmse` on `log n`. The standard error
/// propagates the per-cell Monte Carlo error through the least-squares
/// weights.
pub fn slope_fit(cells: &[RateCell]) -> Result<SlopeFit> {
    if cells.len() < 3 {
        return Err(Error::InvalidArgument("need at least three sample sizes"));
    }
    if cells.iter().any(|c| !(c.rmse > 0.0) || c.n == 0) {
        return Err(Error::InvalidArgument("rmse must be positive in every cell"));
    }
    let xs: Vec<f64> = cells.iter().map(|c| libm::log(c.n as f64)).collect();
    let ys: Vec<f64> = cells.iter().map(|c| libm::log(c.rmse)).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("sample sizes must differ"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let var: f64 = xs
        .iter()
        .zip(cells)
        .map(|(x, c)| {
            let w = (x - mx) / sxx;
            w * w * c.log_rmse_se * c.log_rmse_se
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        std_error: libm::sqrt(var),
        cells: cells.to_vec(),
    })
}
