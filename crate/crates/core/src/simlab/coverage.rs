//! Empirical coverage of two-sided normal intervals built from the
//! simulation standard deviation of the projected estimates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::{sample_sd, two_sided_z};

/// Nominal levels 0.50, 0.55, ..., 0.95.
pub const DEFAULT_LEVELS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

/// `(1, ..., 1)`, `(1, 0, ..., 0)` and `(1, 2, ..., p)`.
pub fn default_projections(p: usize) -> Vec<Vec<f64>> {
    let ones = alloc::vec![1.0; p];
    let first = (0..p).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
    let ramp = (1..=p).map(|k| k as f64).collect();
    alloc::vec![ones, first, ramp]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRow {
    pub n: usize,
    pub p: usize,
    pub nominal_level: f64,
    /// Position in the projection list.
    pub projection_id: usize,
    pub empirical_coverage: f64,
    pub mc_standard_error: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coverage rows (projection-major, then level) for replication estimates
/// `estimates[r] = θ̂_r`.
///
/// For projection `γ`, the interval at level `ℓ` around `γ'θ̂_r` has
/// half-width `z_{(1+ℓ)/2} s_γ` with `s_γ` the sample SD of `{γ'θ̂_r}`; a
/// replication covers when `|γ'θ̂_r - γ'θ₀|` is within the half-width.
pub fn coverage_rows(
    n: usize,
    estimates: &[Vec<f64>],
    theta0: &[f64],
    projections: &[Vec<f64>],
    levels: &[f64],
) -> Result<Vec<CoverageRow>> {
    let p = theta0.len();
    if estimates.len() < 2 {
        return Err(Error::InvalidArgument("need at least two replications"));
    }
    if let Some(e) = estimates.iter().find(|e| e.len() != p) {
        return Err(Error::DimensionMismatch {
            what: "replication estimate",
            expected: p,
            got: e.len(),
        });
    }
    for g in projections {
        if g.len() != p {
            return Err(Error::DimensionMismatch {
                what: "projection direction",
                expected: p,
                got: g.len(),
            });
        }
        if g.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("projection direction is zero"));
        }
    }
    if levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::InvalidArgument("levels must lie in (0, 1)"));
    }

    let reps = estimates.len() as f64;
    let mut rows = Vec::with_capacity(projections.len() * levels.len());
    for (id, g) in projections.iter().enumerate() {
        let projected: Vec<f64> = estimates.iter().map(|e| dot(g, e)).collect();
        let center = dot(g, theta0);
        let sd = sample_sd(&projected);
        for &level in levels {
            let half = two_sided_z(level) * sd;
            let hits = projected
                .iter()
                .filter(|&&v| (v - center).abs() <= half)
                .count();
            let cov = hits as f64 / reps;
            rows.push(CoverageRow {
                n,
                p,
                nominal_level: level,
                projection_id: id,
                empirical_coverage: cov,
                mc_standard_error: libm::sqrt(cov * (1.0 - cov) / reps),
            });
        }
    }
    Ok(rows)
}
