//! Observations, coefficient vectors and estimator specifications.

use alloc::vec::Vec;

use crate::error::{Column, Error, Result};

/// A random sample of `n` observations.
///
/// Covariates are stored column-major with `p + 1` columns. Column 0 is the
/// covariate whose coefficient is normalized to one; coefficient `θ_k`
/// (1-based `k`) multiplies column `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    n: usize,
    cols: usize,
    y: Vec<f64>,
    x: Vec<f64>,
    r: Option<Vec<f64>>,
    v: Option<Vec<f64>>,
    w: Option<Vec<f64>>,
}

impl Sample {
    /// Builds a sample from a response and column-major covariates.
    pub fn new(y: Vec<f64>, x: Vec<f64>, cols: usize) -> Result<Self> {
        let n = y.len();
        if cols < 2 {
            return Err(Error::DimensionMismatch {
                what: "covariate columns (need p + 1 >= 2)",
                expected: 2,
                got: cols,
            });
        }
        if x.len() != n * cols {
            return Err(Error::DimensionMismatch {
                what: "covariate matrix entries",
                expected: n * cols,
                got: x.len(),
            });
        }
        Ok(Self {
            n,
            cols,
            y,
            x,
            r: None,
            v: None,
            w: None,
        })
    }

    /// Builds a sample from covariate columns `[x1, x2, ..., x_{p+1}]`.
    pub fn from_columns(y: Vec<f64>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = y.len();
        let mut x = Vec::with_capacity(n * columns.len());
        for col in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "covariate column length",
                    expected: n,
                    got: col.len(),
                });
            }
            x.extend_from_slice(col);
        }
        Self::new(y, x, columns.len())
    }

    /// Attaches the censoring pair: `r` is the 0/1 uncensoring indicator and
    /// `v` the observed `min(Y, ξ)`.
    pub fn with_censoring(mut self, r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        self.check_len("r", r.len())?;
        self.check_len("v", v.len())?;
        self.r = Some(r);
        self.v = Some(v);
        Ok(self)
    }

    /// Attaches the scalar conditioning variable `w`.
    pub fn with_conditioning(mut self, w: Vec<f64>) -> Result<Self> {
        self.check_len("w", w.len())?;
        self.w = Some(w);
        Ok(self)
    }

    fn check_len(&self, what: &'static str, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of free coefficients `p`.
    pub fn p(&self) -> usize {
        self.cols - 1
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Covariate column `col` (0-based, column 0 is the normalized one).
    pub fn column(&self, col: usize) -> &[f64] {
        &self.x[col * self.n..(col + 1) * self.n]
    }

    pub fn x(&self, row: usize, col: usize) -> f64 {
        self.x[col * self.n + row]
    }

    pub fn r(&self) -> Option<&[f64]> {
        self.r.as_deref()
    }

    pub fn v(&self) -> Option<&[f64]> {
        self.v.as_deref()
    }

    pub fn w(&self) -> Option<&[f64]> {
        self.w.as_deref()
    }

    /// Linear index `X_i'β` for every observation.
    pub fn index(&self, beta: &Beta) -> Vec<f64> {
        let mut out = self.column(0).to_vec();
        for (k, &coef) in beta.theta().iter().enumerate() {
            for (o, &xv) in out.iter_mut().zip(self.column(k + 1)) {
                *o += coef * xv;
            }
        }
        out
    }

    /// Reorders observations: row `i` of the result is row `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.n,
            });
        }
        let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let mut x = Vec::with_capacity(self.x.len());
        for c in 0..self.cols {
            x.extend(pick(self.column(c)));
        }
        Ok(Self {
            n: self.n,
            cols: self.cols,
            y: pick(&self.y),
            x,
            r: self.r.as_deref().map(pick),
            v: self.v.as_deref().map(pick),
            w: self.w.as_deref().map(pick),
        })
    }

    /// Same covariates with a different response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        self.check_len("y", y.len())?;
        Ok(Self { y, ..self.clone() })
    }
}

/// Coefficient vector `β = (1, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beta {
    full: Vec<f64>,
}

impl Beta {
    pub fn from_theta(theta: &[f64]) -> Self {
        let mut full = Vec::with_capacity(theta.len() + 1);
        full.push(1.0);
        full.extend_from_slice(theta);
        Self { full }
    }

    pub fn theta(&self) -> &[f64] {
        &self.full[1..]
    }

    pub fn full(&self) -> &[f64] {
        &self.full
    }

    pub fn p(&self) -> usize {
        self.full.len() - 1
    }

    /// Sets `θ_k` for 1-based `k`.
    pub(crate) fn set(&mut self, k: usize, value: f64) {
        self.full[k] = value;
    }
}

/// Smoothing kernel `K` used by the kernel-weighted estimator.
#[derive(Debug, Clone, Copy)]
pub enum SmoothingKernel {
    /// Standard normal density.
    Gaussian,
    /// Caller-supplied kernel, e.g. a higher-order one.
    Custom(fn(f64) -> f64),
}

impl PartialEq for SmoothingKernel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SmoothingKernel::Gaussian, SmoothingKernel::Gaussian) => true,
            (SmoothingKernel::Custom(a), SmoothingKernel::Custom(b)) => core::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

impl SmoothingKernel {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            SmoothingKernel::Gaussian => crate::stats::normal_pdf(u),
            SmoothingKernel::Custom(k) => k(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// Maximum rank correlation: `1(Y_i>Y_j) 1(X_i'β>X_j'β)`.
    Mrc,
    /// Trimmed response: `M(Y_i) 1(X_i'β>X_j'β)`.
    Cs,
    /// Censored durations: `R_i 1(V_i<V_j) 1(X_i'β<X_j'β)`.
    Kt,
    /// Pairwise comparison localized in `W`:
    /// `1(Y_i>Y_j) 1(X_i'β>X_j'β) K_b(W_i-W_j)`.
    As,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mrc => "mrc",
            EstimatorKind::Cs => "cs",
            EstimatorKind::Kt => "kt",
            EstimatorKind::As => "as",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub trim_lo: f64,
    pub trim_hi: f64,
    pub kernel: SmoothingKernel,
    pub bandwidth_c: f64,
    pub bandwidth_delta: f64,
}

impl EstimatorSpec {
    fn base(kind: EstimatorKind) -> Self {
        Self {
            kind,
            trim_lo: f64::NAN,
            trim_hi: f64::NAN,
            kernel: SmoothingKernel::Gaussian,
            bandwidth_c: f64::NAN,
            bandwidth_delta: f64::NAN,
        }
    }

    pub fn mrc() -> Self {
        Self::base(EstimatorKind::Mrc)
    }

    pub fn cs(trim_lo: f64, trim_hi: f64) -> Self {
        Self {
            trim_lo,
            trim_hi,
            ..Self::base(EstimatorKind::Cs)
        }
    }

    pub fn kt() -> Self {
        Self::base(EstimatorKind::Kt)
    }

    pub fn as_gaussian(bandwidth_c: f64, bandwidth_delta: f64) -> Self {
        Self {
            bandwidth_c,
            bandwidth_delta,
            ..Self::base(EstimatorKind::As)
        }
    }

    pub fn with_kernel(self, kernel: SmoothingKernel) -> Self {
        Self { kernel, ..self }
    }

    /// The trimming map `M(y) = a 1(y<a) + y 1(a<=y<=b) + b 1(y>b)`.
    pub fn trim(&self, y: f64) -> f64 {
        if y < self.trim_lo {
            self.trim_lo
        } else if y > self.trim_hi {
            self.trim_hi
        } else {
            y
        }
    }

    /// Bandwidth `b = c n^{-δ}`.
    pub fn bandwidth(&self, n: usize) -> f64 {
        self.bandwidth_c * libm::pow(n as f64, -self.bandwidth_delta)
    }

    fn check(&self) -> Result<()> {
        match self.kind {
            EstimatorKind::Cs => {
                if !(self.trim_lo.is_finite() && self.trim_hi.is_finite()) {
                    return Err(Error::InvalidSpec("trim bounds must be finite"));
                }
                if self.trim_lo >= self.trim_hi {
                    return Err(Error::InvalidSpec("trim_lo must be below trim_hi"));
                }
            }
            EstimatorKind::As => {
                if !(self.bandwidth_c > 0.0 && self.bandwidth_c.is_finite()) {
                    return Err(Error::InvalidSpec("bandwidth_c must be positive"));
                }
                if !(self.bandwidth_delta > 0.0 && self.bandwidth_delta < 1.0) {
                    return Err(Error::InvalidSpec("bandwidth_delta must lie in (0, 1)"));
                }
            }
            EstimatorKind::Mrc | EstimatorKind::Kt => {}
        }
        Ok(())
    }
}

/// Compact box `Θ = Π [lo_k, hi_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SearchDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::LengthMismatch {
                left: lo.len(),
                right: hi.len(),
            });
        }
        for (k, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidDomain { coordinate: k });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[θ_init - 10, θ_init + 10]` per coordinate.
    pub fn around(init: &[f64]) -> Self {
        Self::with_radius(init, 10.0)
    }

    pub fn with_radius(init: &[f64], radius: f64) -> Self {
        Self {
            lo: init.iter().map(|t| t - radius).collect(),
            hi: init.iter().map(|t| t + radius).collect(),
        }
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(t, (l, h))| l <= t && t <= h)
    }
}

fn check_finite(column: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(Error::NonFiniteValue { column, row }),
        None => Ok(()),
    }
}

/// Checks the joint invariants of a sample and an estimator specification.
pub fn validate_sample(sample: &Sample, spec: &EstimatorSpec) -> Result<()> {
    if sample.n < 2 {
        return Err(Error::TooFewObservations(sample.n));
    }
    check_finite("y", &sample.y)?;
    for c in 0..sample.cols {
        if let Some(row) = sample.column(c).iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { column: "x", row });
        }
    }
    match (&sample.r, &sample.v) {
        (Some(r), Some(v)) => {
            if let Some(row) = r.iter().position(|&x| x != 0.0 && x != 1.0) {
                return Err(Error::InvalidIndicator { row, value: r[row] });
            }
            check_finite("v", v)?;
        }
        (None, None) => {}
        (None, Some(_)) => return Err(Error::MissingColumn(Column::R)),
        (Some(_), None) => return Err(Error::MissingColumn(Column::V)),
    }
    if let Some(w) = &sample.w {
        check_finite("w", w)?;
    }
    spec.check()?;
    match spec.kind {
        EstimatorKind::Kt => {
            if sample.r.is_none() {
                return Err(Error::MissingColumn(Column::R));
            }
        }
        EstimatorKind::As => {
            if sample.w.is_none() {
                return Err(Error::MissingColumn(Column::W));
            }
        }
        EstimatorKind::Mrc | EstimatorKind::Cs => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tiny() -> Sample {
        Sample::from_columns(vec![1.0, 0.0], &[vec![0.5, 1.5], vec![2.0, -1.0]]).unwrap()
    }

    #[test]
    fn minimal_sample_is_valid_for_mrc() {
        assert_eq!(validate_sample(&tiny(), &EstimatorSpec::mrc()), Ok(()));
    }

    #[test]
    fn kt_without_censoring_columns() {
        assert_eq!(
            validate_sample(&tiny(), &EstimatorSpec::kt()),
            Err(Error::MissingColumn(Column::R))
        );
    }

    #[test]
    fn nan_in_covariates() {
        let s = Sample::from_columns(vec![1.0, 0.0], &[vec![0.5, 1.5], vec![f64::NAN, -1.0]])
            .unwrap();
        assert!(matches!(
            validate_sample(&s, &EstimatorSpec::mrc()),
            Err(Error::NonFiniteValue { column: "x", row: 0 })
        ));
    }

    #[test]
    fn single_observation_rejected() {
        let s = Sample::from_columns(vec![1.0], &[vec![0.5], vec![2.0]]).unwrap();
        assert_eq!(
            validate_sample(&s, &EstimatorSpec::mrc()),
            Err(Error::TooFewObservations(1))
        );
    }

    #[test]
    fn indicator_must_be_binary() {
        let s = tiny()
            .with_censoring(vec![1.0, 2.0], vec![0.0, 1.0])
            .unwrap();
        assert!(matches!(
            validate_sample(&s, &EstimatorSpec::kt()),
            Err(Error::InvalidIndicator { row: 1, .. })
        ));
    }

    #[test]
    fn spec_parameter_checks() {
        let s = tiny().with_conditioning(vec![0.0, 1.0]).unwrap();
        assert!(validate_sample(&s, &EstimatorSpec::cs(1.0, 1.0)).is_err());
        assert!(validate_sample(&s, &EstimatorSpec::cs(-1.0, 1.0)).is_ok());
        assert!(validate_sample(&s, &EstimatorSpec::as_gaussian(0.0, 0.2)).is_err());
        assert!(validate_sample(&s, &EstimatorSpec::as_gaussian(1.0, 1.0)).is_err());
        assert!(validate_sample(&s, &EstimatorSpec::as_gaussian(1.0, 0.2)).is_ok());
        assert_eq!(
            validate_sample(&tiny(), &EstimatorSpec::as_gaussian(1.0, 0.2)),
            Err(Error::MissingColumn(Column::W))
        );
    }

    #[test]
    fn mismatched_columns_rejected_at_construction() {
        assert!(Sample::from_columns(vec![1.0, 0.0], &[vec![0.5], vec![2.0, -1.0]]).is_err());
        assert!(tiny().with_conditioning(vec![1.0]).is_err());
    }

    #[test]
    fn trimming_map() {
        let spec = EstimatorSpec::cs(-1.0, 1.0);
        assert_eq!(spec.trim(2.0), 1.0);
        assert_eq!(spec.trim(-2.0), -1.0);
        assert_eq!(spec.trim(0.25), 0.25);
    }

    #[test]
    fn domain_rejects_empty_box() {
        assert!(SearchDomain::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        let d = SearchDomain::around(&[2.0]);
        assert_eq!((d.lo()[0], d.hi()[0]), (-8.0, 12.0));
    }

    proptest::proptest! {
        #[test]
        fn beta_round_trip(theta in proptest::collection::vec(-1e6f64..1e6, 1..8)) {
            let beta = Beta::from_theta(&theta);
            proptest::prop_assert_eq!(beta.full()[0].to_bits(), 1.0f64.to_bits());
            proptest::prop_assert_eq!(beta.theta(), &theta[..]);
            proptest::prop_assert_eq!(&beta.full()[1..], &theta[..]);
        }
    }
}
