//! Rank-correlation M-estimators over U-process objectives.
//!
//! The crate covers four pairwise rank kernels (maximum rank correlation,
//! the trimmed-response variant, the censored-duration variant and the
//! kernel-weighted variant), exact coordinate-wise maximization of the
//! resulting step-function objectives, the numerical-derivative sandwich
//! covariance estimator and the pure building blocks of a Monte Carlo lab.
//!
//! Everything here is `no_std` (with `alloc`). File formats, the command
//! line front end and the parallel Monte Carlo drivers live in the `rankest`
//! crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod fenwick;
mod linalg;

pub mod covariance;
pub mod estimators;
pub mod sample;
pub mod simlab;
pub mod stats;
pub mod ustat;

pub use crate::covariance::{
    default_step, default_step_n_only, estimate_covariance, projection_ci, CovarianceEstimate,
    estimate_covariance_with, derivative_matrices, DerivativeMatrices, RankTau, TauSource,
};
pub use crate::error::{Column, Error, Result};
pub use crate::estimators::{
    coordinate_breakpoints, fit, maximize_coordinate, FitOptions, FitResult, DEFAULT_MAX_SWEEPS,
};
pub use crate::sample::{
    validate_sample, Beta, EstimatorKind, EstimatorSpec, Sample, SearchDomain, SmoothingKernel,
};
pub use crate::ustat::{fast_concordance, hoeffding_check, objective, tau_n, ObjectiveValue};
