//! Median absolute error of projected sandwich variances.

use alloc::vec::Vec;

use crate::stats::median;

/// Step multipliers `c` of `ε = c n^{-1/6}`.
pub const DEFAULT_MULTIPLIERS: [f64; 6] = [1.1, 0.9, 0.7, 0.5, 0.3, 0.1];

/// `(p^{-1/2}, ..., p^{-1/2})`.
pub fn unit_diagonal_direction(p: usize) -> Vec<f64> {
    alloc::vec![1.0 / libm::sqrt(p as f64); p]
}

/// `median_r |estimates[r] - truth|`.
pub fn median_absolute_error(estimates: &[f64], truth: f64) -> f64 {
    let dev: Vec<f64> = estimates.iter().map(|e| (e - truth).abs()).collect();
    median(&dev)
}
