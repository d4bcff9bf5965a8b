//! Numerical-derivative estimate of the sandwich covariance `V⁻¹ Δ V⁻¹`.
//!
//! With `τ_n(z; θ) = P_n f(z, ·; θ) + P_n f(·, z; θ)` and unit vectors `u_i`,
//!
//! ```text
//! p_ni(z)  = ε⁻¹ {τ_n(z; θ̂+εu_i) - τ_n(z; θ̂)}
//! p_nij(z) = ε⁻² {τ_n(z; θ̂+ε(u_i+u_j)) - τ_n(z; θ̂+εu_i) - τ_n(z; θ̂+εu_j) + τ_n(z; θ̂)}
//! Δ̂_ij     = P_n {p_ni p_nj}
//! V̂_ij     = P_n p_nij / 2
//! ```
//!
//! Only forward differences are used. Each of the `1 + p + p(p+1)/2`
//! perturbed parameters is evaluated once for all observations together.
//! Centering constants of the kernel cancel in every difference, so the raw
//! kernel is used throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{matmul, symmetric_eigen, transpose};
use crate::sample::{validate_sample, Beta, EstimatorSpec, Sample};
use crate::stats::{pairwise_sum, two_sided_z};
use crate::ustat::{check_beta, PairWeights};

/// Smallest admissible ratio of the extreme singular values of `V̂`.
pub const SINGULAR_FLOOR: f64 = 1e-10;

/// Source of `n τ_n(Z_k; θ)` for every observation `k` at once.
pub trait TauSource {
    fn n(&self) -> usize;
    fn p(&self) -> usize;
    /// `Σ_j f(Z_k, Z_j; θ) + Σ_j f(Z_j, Z_k; θ)` for `k = 0..n`.
    fn tau_sums(&self, theta: &[f64]) -> Vec<f64>;
}

/// [`TauSource`] for the four rank kernels.
pub struct RankTau<'a> {
    sample: &'a Sample,
    weights: PairWeights<'a>,
}

impl<'a> RankTau<'a> {
    pub fn new(sample: &'a Sample, spec: &EstimatorSpec) -> Result<Self> {
        validate_sample(sample, spec)?;
        Ok(Self {
            sample,
            weights: PairWeights::new(sample, spec),
        })
    }
}

impl TauSource for RankTau<'_> {
    fn n(&self) -> usize {
        self.sample.n()
    }

    fn p(&self) -> usize {
        self.sample.p()
    }

    fn tau_sums(&self, theta: &[f64]) -> Vec<f64> {
        self.weights
            .tau_sums(&self.sample.index(&Beta::from_theta(theta)))
    }
}

/// `c (p/n)^{1/6}`, the dimension-aware step size.
pub fn default_step(n: usize, p: usize, c: f64) -> Result<f64> {
    if n < 2 || p == 0 {
        return Err(Error::InvalidArgument("need n >= 2 and p >= 1"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument("step multiplier must be positive"));
    }
    Ok(c * libm::pow(p as f64 / n as f64, 1.0 / 6.0))
}

/// `c n^{-1/6}`, the step grid of the covariance MAE experiment.
pub fn default_step_n_only(n: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("need n >= 2"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument("step multiplier must be positive"));
    }
    Ok(c * libm::pow(n as f64, -1.0 / 6.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub p: usize,
    /// `Δ̂`, row-major.
    pub delta_hat: Vec<f64>,
    /// `V̂` after symmetrization, row-major.
    pub v_hat: Vec<f64>,
    /// `V̂⁻¹ Δ̂ V̂⁻¹`, row-major.
    pub sandwich: Vec<f64>,
    pub epsilon: f64,
    /// Ratio of the largest to the smallest singular value of `V̂`.
    pub v_condition: f64,
    /// Largest `|v̂_ij - v̂_ji|` before symmetrization.
    pub v_asymmetry: f64,
}

impl CovarianceEstimate {
    /// `γ' Σ γ` for the sandwich `Σ`.
    pub fn quadratic_form(&self, gamma: &[f64]) -> f64 {
        let p = self.p;
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                acc += gamma[i] * self.sandwich[i * p + j] * gamma[j];
            }
        }
        acc
    }
}

/// Finite-difference matrices before inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrices {
    pub p: usize,
    pub delta_hat: Vec<f64>,
    /// As computed, before symmetrization.
    pub v_raw: Vec<f64>,
}

/// `Δ̂` and unsymmetrized `V̂` at `theta_hat` with step `epsilon`.
pub fn derivative_matrices<S: TauSource + ?Sized>(
    source: &S,
    theta_hat: &[f64],
    epsilon: f64,
) -> Result<DerivativeMatrices> {
    let p = source.p();
    let n = source.n();
    if theta_hat.len() != p {
        return Err(Error::DimensionMismatch {
            what: "theta_hat",
            expected: p,
            got: theta_hat.len(),
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidStep(epsilon));
    }
    let shifted = |dirs: &[usize]| -> Vec<f64> {
        let mut t = theta_hat.to_vec();
        for &d in dirs {
            t[d] += epsilon;
        }
        t
    };
    let base = source.tau_sums(theta_hat);
    let single: Vec<Vec<f64>> = (0..p).map(|i| source.tau_sums(&shifted(&[i]))).collect();
    // double[tri(i, j)] for i <= j
    let tri = |i: usize, j: usize| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * p - a * (a + 1) / 2 + b
    };
    let mut double = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        for j in i..p {
            double.push(source.tau_sums(&shifted(&[i, j])));
        }
    }
    if base
        .iter()
        .chain(single.iter().flatten())
        .chain(double.iter().flatten())
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidArgument("non-finite tau evaluation"));
    }

    let nf = n as f64;
    // τ_n = sums / n
    let scores: Vec<Vec<f64>> = single
        .iter()
        .map(|s| {
            s.iter()
                .zip(&base)
                .map(|(a, b)| (a - b) / (nf * epsilon))
                .collect()
        })
        .collect();

    let mut delta_hat = vec![0.0; p * p];
    let mut v_raw = vec![0.0; p * p];
    let mut buf = vec![0.0; n];
    for i in 0..p {
        for j in 0..p {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = scores[i][k] * scores[j][k];
            }
            delta_hat[i * p + j] = pairwise_sum(&buf) / nf;

            let d = &double[tri(i, j)];
            for (k, b) in buf.iter_mut().enumerate() {
                *b = (d[k] - single[i][k] - single[j][k] + base[k]) / (nf * epsilon * epsilon);
            }
            v_raw[i * p + j] = 0.5 * pairwise_sum(&buf) / nf;
        }
    }
    Ok(DerivativeMatrices {
        p,
        delta_hat,
        v_raw,
    })
}

/// Sandwich covariance from any [`TauSource`].
pub fn estimate_covariance_with<S: TauSource + ?Sized>(
    source: &S,
    theta_hat: &[f64],
    epsilon: f64,
) -> Result<CovarianceEstimate> {
    let DerivativeMatrices {
        p,
        delta_hat,
        v_raw,
    } = derivative_matrices(source, theta_hat, epsilon)?;

    let mut v_hat = vec![0.0; p * p];
    let mut v_asymmetry = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            v_hat[i * p + j] = 0.5 * (v_raw[i * p + j] + v_raw[j * p + i]);
            v_asymmetry = v_asymmetry.max((v_raw[i * p + j] - v_raw[j * p + i]).abs());
        }
    }

    let (vals, q) = symmetric_eigen(&v_hat, p);
    let largest = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let smallest = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(largest > 0.0) || smallest < SINGULAR_FLOOR * largest {
        return Err(Error::SingularHessian { smallest, largest });
    }
    // V̂⁻¹ = Q diag(1/λ) Q'
    let mut scaled = q.clone();
    for r in 0..p {
        for c in 0..p {
            scaled[r * p + c] /= vals[c];
        }
    }
    let v_inv = matmul(&scaled, &transpose(&q, p), p);
    let mut sandwich = matmul(&matmul(&v_inv, &delta_hat, p), &v_inv, p);
    for i in 0..p {
        for j in 0..i {
            let m = 0.5 * (sandwich[i * p + j] + sandwich[j * p + i]);
            sandwich[i * p + j] = m;
            sandwich[j * p + i] = m;
        }
    }

    Ok(CovarianceEstimate {
        p,
        delta_hat,
        v_hat,
        sandwich,
        epsilon,
        v_condition: largest / smallest,
        v_asymmetry,
    })
}

/// Sandwich covariance of a rank estimator at `theta_hat`.
pub fn estimate_covariance(
    sample: &Sample,
    spec: &EstimatorSpec,
    theta_hat: &[f64],
    epsilon: f64,
) -> Result<CovarianceEstimate> {
    let source = RankTau::new(sample, spec)?;
    check_beta(sample, &Beta::from_theta(theta_hat))?;
    estimate_covariance_with(&source, theta_hat, epsilon)
}

/// Two-sided normal interval `γ'θ̂ ∓ z sqrt(γ' Σ γ / n)` at `level`.
pub fn projection_ci(
    theta_hat: &[f64],
    cov: &CovarianceEstimate,
    gamma: &[f64],
    n: usize,
    level: f64,
) -> Result<(f64, f64)> {
    if gamma.len() != cov.p || theta_hat.len() != cov.p {
        return Err(Error::DimensionMismatch {
            what: "projection direction",
            expected: cov.p,
            got: gamma.len(),
        });
    }
    if gamma.iter().all(|&g| g == 0.0) {
        return Err(Error::InvalidArgument("projection direction is zero"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument("level must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    let var = cov.quadratic_form(gamma);
    if !(var > 0.0) {
        return Err(Error::NonPositiveVariance(var));
    }
    let center: f64 = gamma.iter().zip(theta_hat).map(|(g, t)| g * t).sum();
    let half = two_sided_z(level) * libm::sqrt(var / n as f64);
    Ok((center - half, center + half))
}
