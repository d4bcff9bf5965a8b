//! Binary choice design `Y = 1(X'β* + ε >= 0)` with AR(1)-correlated normal
//! covariates, `β* = (2, 4, ..., 2(p+1))` and standard normal errors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::sample::Sample;
use crate::simlab::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpConfig {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

impl DgpConfig {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            rho: 0.5,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewObservations(self.n));
        }
        if self.p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1"));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidArgument("rho must satisfy |rho| < 1"));
        }
        Ok(())
    }
}

/// `β* = (2, 4, ..., 2(p+1))`.
pub fn true_beta(p: usize) -> Vec<f64> {
    (1..=p + 1).map(|j| 2.0 * j as f64).collect()
}

/// `θ₀ = (β*_2, ..., β*_{p+1}) / β*_1 = (2, 3, ..., p+1)`.
pub fn true_theta(p: usize) -> Vec<f64> {
    let b = true_beta(p);
    b[1..].iter().map(|v| v / b[0]).collect()
}

/// `Σ_jk = rho^|j-k|`, row-major, dimension `d`.
pub fn ar1_covariance(d: usize, rho: f64) -> Vec<f64> {
    let mut s = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..d {
            s[j * d + k] = libm::pow(rho, (j as f64 - k as f64).abs());
        }
    }
    s
}

/// Draws a sample using `cfg.seed` as the only source of randomness.
pub fn generate_binary_choice(cfg: &DgpConfig) -> Result<(Sample, Vec<f64>)> {
    generate_binary_choice_with(cfg, &mut StreamRng::from_seed(cfg.seed))
}

/// Draws a sample from `rng`; `cfg.seed` is ignored. Returns the sample and
/// the normalized true coefficients `θ₀`.
pub fn generate_binary_choice_with(
    cfg: &DgpConfig,
    rng: &mut StreamRng,
) -> Result<(Sample, Vec<f64>)> {
    cfg.check()?;
    let (n, d) = (cfg.n, cfg.p + 1);
    let chol = cholesky(&ar1_covariance(d, cfg.rho), d)
        .ok_or(Error::InvalidArgument("covariance is not positive definite"))?;
    let beta = true_beta(cfg.p);

    let mut x = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    let mut z = vec![0.0; d];
    for i in 0..n {
        for zj in z.iter_mut() {
            *zj = rng.normal();
        }
        let mut index = 0.0;
        for j in 0..d {
            let xij: f64 = (0..=j).map(|k| chol[j * d + k] * z[k]).sum();
            x[j * n + i] = xij;
            index += beta[j] * xij;
        }
        let eps = rng.normal();
        y.push(if index + eps >= 0.0 { 1.0 } else { 0.0 });
    }
    Ok((Sample::new(y, x, d)?, true_theta(cfg.p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_truth() {
        assert_eq!(true_theta(1), [2.0]);
        assert_eq!(true_theta(4), [2.0, 3.0, 4.0, 5.0]);
        assert_eq!(true_beta(1), [2.0, 4.0]);
    }

    #[test]
    fn covariate_moments_match_ar1() {
        let cfg = DgpConfig::new(100_000, 2, 99);
        let (s, _) = generate_binary_choice(&cfg).unwrap();
        let sigma = ar1_covariance(3, 0.5);
        for j in 0..3 {
            for k in 0..3 {
                let (a, b) = (s.column(j), s.column(k));
                let ma = a.iter().sum::<f64>() / a.len() as f64;
                let mb = b.iter().sum::<f64>() / b.len() as f64;
                let c = a
                    .iter()
                    .zip(b)
                    .map(|(u, v)| (u - ma) * (v - mb))
                    .sum::<f64>()
                    / (a.len() as f64 - 1.0);
                assert!((c - sigma[j * 3 + k]).abs() < 0.02, "({j},{k}) {c}");
            }
        }
    }

    #[test]
    fn responses_are_binary_and_seeded() {
        let cfg = DgpConfig::new(50, 3, 4);
        let (a, _) = generate_binary_choice(&cfg).unwrap();
        let (b, _) = generate_binary_choice(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.y().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(generate_binary_choice(&DgpConfig { rho: 1.0, ..cfg }).is_err());
    }
}
