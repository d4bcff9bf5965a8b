//! Pure building blocks of the Monte Carlo study: random streams, the
//! binary choice design, density estimates, normality tests and the
//! aggregation of replication results into coverage, MAE and rate tables.
//! Running replications (in parallel) is left to the caller.

pub mod coverage;
pub mod dgp;
pub mod kde;
pub mod mae;
pub mod normality;
pub mod rates;
pub mod rng;

pub use coverage::{coverage_rows, default_projections, CoverageRow, DEFAULT_LEVELS};
pub use dgp::{ar1_covariance, generate_binary_choice, generate_binary_choice_with, true_beta, true_theta, DgpConfig};
pub use kde::{figure_grid, kde, silverman_bandwidth};
pub use mae::{median_absolute_error, unit_diagonal_direction, DEFAULT_MULTIPLIERS};
pub use normality::{jarque_bera, kolmogorov_sf, ks_normal, normality_tests, TestResult};
pub use rates::{rmse, slope_fit, RateCell, SlopeFit};
pub use rng::{Purpose, StreamRng};
