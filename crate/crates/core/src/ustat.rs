//! Pairwise U-statistic objectives `S_n(β) = Σ_{i≠j} f(Z_i, Z_j; β) / (n(n-1))`.
//!
//! All four kernels share the form `w(i, j) · 1(u_i > u_j)` where `u = Xβ`
//! and `w` depends only on the responses:
//!
//! | kind | `w(i, j)` |
//! |------|-----------|
//! | MRC  | `1(Y_i > Y_j)` |
//! | CS   | `M(Y_i)` |
//! | KT   | `R_j 1(V_j < V_i)` (the `<` comparisons swapped onto the pair `(j, i)`) |
//! | AS   | `1(Y_i > Y_j) K_b(W_i - W_j)` |
//!
//! Ties in `u` contribute nothing. MRC and KT sums are integer counts and are
//! accumulated exactly; CS and AS sums are real and reduced in an order that
//! does not depend on observation order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fenwick::{argsort, dense_ranks, tie_groups, Fenwick};
use crate::sample::{validate_sample, Beta, EstimatorKind, EstimatorSpec, Sample, SmoothingKernel};
use crate::stats::pairwise_sum;

/// Value of `S_n(β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    /// `n(n-1)`.
    pub num_pairs: u64,
    /// Pairwise sum for the integer-valued kernels (MRC, KT).
    pub raw_count: Option<u64>,
}

impl ObjectiveValue {
    fn from_count(count: u64, n: usize) -> Self {
        let num_pairs = (n * (n - 1)) as u64;
        Self {
            value: count as f64 / num_pairs as f64,
            num_pairs,
            raw_count: Some(count),
        }
    }

    fn from_sum(sum: f64, n: usize) -> Self {
        let num_pairs = (n * (n - 1)) as u64;
        Self {
            value: sum / num_pairs as f64,
            num_pairs,
            raw_count: None,
        }
    }
}

/// Response-side pair weights `w(i, j)` of a validated sample.
#[derive(Clone)]
pub(crate) enum PairWeights<'a> {
    Mrc {
        y: &'a [f64],
    },
    Cs {
        trimmed: Vec<f64>,
    },
    Kt {
        r: &'a [f64],
        v: &'a [f64],
    },
    As {
        y: &'a [f64],
        w: &'a [f64],
        bandwidth: f64,
        kernel: SmoothingKernel,
    },
}

impl<'a> PairWeights<'a> {
    /// Assumes `validate_sample` has passed.
    pub fn new(sample: &'a Sample, spec: &EstimatorSpec) -> Self {
        match spec.kind {
            EstimatorKind::Mrc => PairWeights::Mrc { y: sample.y() },
            EstimatorKind::Cs => PairWeights::Cs {
                trimmed: sample.y().iter().map(|&y| spec.trim(y)).collect(),
            },
            EstimatorKind::Kt => PairWeights::Kt {
                r: sample.r().expect("validated"),
                v: sample.v().expect("validated"),
            },
            EstimatorKind::As => PairWeights::As {
                y: sample.y(),
                w: sample.w().expect("validated"),
                bandwidth: spec.bandwidth(sample.n()),
                kernel: spec.kernel,
            },
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, PairWeights::Mrc { .. } | PairWeights::Kt { .. })
    }

    /// Weight of the ordered pair `(i, j)` when `u_i > u_j`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self {
            PairWeights::Mrc { y } => (y[i] > y[j]) as u8 as f64,
            PairWeights::Cs { trimmed } => trimmed[i],
            PairWeights::Kt { r, v } => {
                if v[j] < v[i] {
                    r[j]
                } else {
                    0.0
                }
            }
            PairWeights::As {
                y,
                w,
                bandwidth,
                kernel,
            } => {
                if y[i] > y[j] {
                    kernel.eval((w[i] - w[j]) / bandwidth) / bandwidth
                } else {
                    0.0
                }
            }
        }
    }

    /// `f(Z_i, Z_j)` for the index vector `u`.
    #[inline]
    pub fn kernel(&self, i: usize, j: usize, u: &[f64]) -> f64 {
        if u[i] > u[j] {
            self.weight(i, j)
        } else {
            0.0
        }
    }

    /// `Σ_{i≠j} f(Z_i, Z_j)` for the index vector `u`.
    pub fn pair_sum(&self, u: &[f64]) -> ObjectiveSum {
        match self {
            PairWeights::Mrc { y } => ObjectiveSum::Count(concordance(u, y, |_| 1)),
            PairWeights::Kt { r, v } => {
                let neg_u: Vec<f64> = u.iter().map(|x| -x).collect();
                let neg_v: Vec<f64> = v.iter().map(|x| -x).collect();
                ObjectiveSum::Count(concordance(&neg_u, &neg_v, |i| r[i] as u64))
            }
            PairWeights::Cs { trimmed } => {
                let below = strictly_below_counts(u);
                let mut terms: Vec<f64> = trimmed
                    .iter()
                    .zip(&below)
                    .map(|(m, &c)| m * c as f64)
                    .collect();
                ObjectiveSum::Real(order_free_sum(&mut terms))
            }
            PairWeights::As { .. } => {
                let n = u.len();
                let mut row = Vec::with_capacity(n);
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    row.clear();
                    row.extend(
                        (0..n)
                            .filter(|&j| j != i)
                            .map(|j| self.kernel(i, j, u))
                            .filter(|&t| t != 0.0),
                    );
                    rows.push(order_free_sum(&mut row));
                }
                ObjectiveSum::Real(order_free_sum(&mut rows))
            }
        }
    }

    /// `Σ_j f(Z_k, Z_j) + Σ_j f(Z_j, Z_k)` for every `k` (that is `n τ_n`).
    pub fn tau_sums(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        match self {
            PairWeights::Mrc { y } => {
                let (below, above) = dominance_counts(u, y, |_| 1, |_| 1);
                below.iter().zip(&above).map(|(a, b)| (a + b) as f64).collect()
            }
            PairWeights::Kt { r, v } => {
                // f(k, j) = r_j 1(v_j < v_k) 1(u_j < u_k); f(j, k) = r_k 1(v_k < v_j) 1(u_k < u_j)
                let (below, above) = dominance_counts(u, v, |j| r[j] as u64, |_| 1);
                (0..n)
                    .map(|k| (below[k] + r[k] as u64 * above[k]) as f64)
                    .collect()
            }
            PairWeights::Cs { trimmed } => {
                let order = argsort(u);
                let below = strictly_below_counts(u);
                // Σ_{j: u_j > u_k} M(Y_j), by suffix sums over groups of tied u.
                let mut above_sum = vec![0.0; n];
                let mut acc = 0.0;
                let groups: Vec<&[usize]> = tie_groups(&order, u).collect();
                for g in groups.iter().rev() {
                    for &k in g.iter() {
                        above_sum[k] = acc;
                    }
                    for &k in g.iter() {
                        acc += trimmed[k];
                    }
                }
                (0..n)
                    .map(|k| trimmed[k] * below[k] as f64 + above_sum[k])
                    .collect()
            }
            PairWeights::As { .. } => (0..n)
                .map(|k| {
                    (0..n)
                        .map(|j| self.kernel(k, j, u) + self.kernel(j, k, u))
                        .sum()
                })
                .collect(),
        }
    }
}

/// Unnormalized pair sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ObjectiveSum {
    Count(u64),
    Real(f64),
}

impl ObjectiveSum {
    pub fn as_f64(self) -> f64 {
        match self {
            ObjectiveSum::Count(c) => c as f64,
            ObjectiveSum::Real(s) => s,
        }
    }

    pub fn into_value(self, n: usize) -> ObjectiveValue {
        match self {
            ObjectiveSum::Count(c) => ObjectiveValue::from_count(c, n),
            ObjectiveSum::Real(s) => ObjectiveValue::from_sum(s, n),
        }
    }
}

/// Sum whose result does not depend on the order of `terms`.
fn order_free_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    pairwise_sum(terms)
}

/// For each `k`, the number of `j` with `u_j < u_k`.
fn strictly_below_counts(u: &[f64]) -> Vec<u64> {
    let order = argsort(u);
    let mut out = vec![0; u.len()];
    let mut seen = 0u64;
    for g in tie_groups(&order, u) {
        for &k in g {
            out[k] = seen;
        }
        seen += g.len() as u64;
    }
    out
}

/// `Σ_{i≠j} weight(i) 1(y_i > y_j) 1(u_i > u_j)`.
fn concordance(u: &[f64], y: &[f64], weight: impl Fn(usize) -> u64) -> u64 {
    let (ranks, m) = dense_ranks(y);
    let order = argsort(u);
    let mut tree = Fenwick::new(m);
    let mut total = 0;
    for g in tie_groups(&order, u) {
        for &i in g {
            total += weight(i) * tree.below(ranks[i]);
        }
        for &i in g {
            tree.add(ranks[i], 1);
        }
    }
    total
}

/// Per observation `k`:
/// `below[k] = Σ_j wb(j) 1(y_j < y_k) 1(u_j < u_k)` and
/// `above[k] = Σ_j wa(j) 1(y_j > y_k) 1(u_j > u_k)`.
fn dominance_counts(
    u: &[f64],
    y: &[f64],
    wb: impl Fn(usize) -> u64,
    wa: impl Fn(usize) -> u64,
) -> (Vec<u64>, Vec<u64>) {
    let n = u.len();
    let (ranks, m) = dense_ranks(y);
    let order = argsort(u);
    let groups: Vec<&[usize]> = tie_groups(&order, u).collect();
    let mut below = vec![0; n];
    let mut above = vec![0; n];

    let mut tree = Fenwick::new(m);
    for g in &groups {
        for &k in g.iter() {
            below[k] = tree.below(ranks[k]);
        }
        for &k in g.iter() {
            tree.add(ranks[k], wb(k));
        }
    }
    let mut tree = Fenwick::new(m);
    for g in groups.iter().rev() {
        for &k in g.iter() {
            above[k] = tree.above(ranks[k]);
        }
        for &k in g.iter() {
            tree.add(ranks[k], wa(k));
        }
    }
    (below, above)
}

/// Number of ordered pairs with `y_i > y_j` and `u_i > u_j`, in
/// `O(n log n)`.
pub fn fast_concordance(u: &[f64], y: &[f64]) -> Result<u64> {
    if u.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: y.len(),
        });
    }
    if u.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points"));
    }
    Ok(concordance(u, y, |_| 1))
}

/// The objective `S_n(β)`, uncentered.
pub fn objective(sample: &Sample, spec: &EstimatorSpec, beta: &Beta) -> Result<ObjectiveValue> {
    validate_sample(sample, spec)?;
    check_beta(sample, beta)?;
    let u = sample.index(beta);
    Ok(PairWeights::new(sample, spec).pair_sum(&u).into_value(sample.n()))
}

pub(crate) fn check_beta(sample: &Sample, beta: &Beta) -> Result<()> {
    if beta.p() != sample.p() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: sample.p(),
            got: beta.p(),
        });
    }
    if beta.theta().iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("coefficients must be finite"));
    }
    Ok(())
}

/// `τ_n(Z_k; θ) = P_n f(Z_k, ·; θ) + P_n f(·, Z_k; θ)`.
///
/// With `reference = Some(β_ref)` the kernel is centered,
/// `f(·, ·; β) - f(·, ·; β_ref)`; with `None` it is the raw kernel.
/// Self-pairs are included in both averages; they are zero for every kernel.
pub fn tau_n(
    sample: &Sample,
    spec: &EstimatorSpec,
    z_index: usize,
    beta: &Beta,
    reference: Option<&Beta>,
) -> Result<f64> {
    validate_sample(sample, spec)?;
    check_beta(sample, beta)?;
    let n = sample.n();
    if z_index >= n {
        return Err(Error::IndexOutOfRange {
            index: z_index,
            len: n,
        });
    }
    let weights = PairWeights::new(sample, spec);
    let row_sum = |u: &[f64]| -> f64 {
        (0..n)
            .map(|j| weights.kernel(z_index, j, u) + weights.kernel(j, z_index, u))
            .sum()
    };
    let u = sample.index(beta);
    let mut total = row_sum(&u);
    if let Some(r) = reference {
        check_beta(sample, r)?;
        total -= row_sum(&sample.index(r));
    }
    Ok(total / n as f64)
}

/// Largest residual of the empirical Hoeffding decomposition
/// `Γ_n = Γ̂ + P_n ĝ + U_n ĥ` of the kernel centered at `reference`.
///
/// The population means inside `g` and `h` are replaced by the leave-one-out
/// row and column means `a_i = Σ_{j≠i} f(Z_i, Z_j) / (n-1)` and
/// `b_j = Σ_{i≠j} f(Z_i, Z_j) / (n-1)`, and `Γ̂` by `Γ_n` itself. The identity
/// then holds exactly, and so do `P_n a = Γ_n` and `P_n b = Γ_n`; the
/// returned value is the largest of the three absolute residuals.
pub fn hoeffding_check(
    sample: &Sample,
    spec: &EstimatorSpec,
    beta: &Beta,
    reference: &Beta,
) -> Result<f64> {
    validate_sample(sample, spec)?;
    check_beta(sample, beta)?;
    check_beta(sample, reference)?;
    let n = sample.n();
    let weights = PairWeights::new(sample, spec);
    let u = sample.index(beta);
    let u_ref = sample.index(reference);
    let f = |i: usize, j: usize| weights.kernel(i, j, &u) - weights.kernel(i, j, &u_ref);

    let nf = n as f64;
    let mut gamma = 0.0;
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = f(i, j);
                gamma += v;
                a[i] += v;
                b[j] += v;
            }
        }
    }
    gamma /= nf * (nf - 1.0);
    for x in a.iter_mut().chain(b.iter_mut()) {
        *x /= nf - 1.0;
    }

    let linear = (0..n).map(|i| a[i] + b[i] - 2.0 * gamma).sum::<f64>() / nf;
    let mut degenerate = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                degenerate += f(i, j) - a[i] - b[j] + gamma;
            }
        }
    }
    degenerate /= nf * (nf - 1.0);

    let mean_a = a.iter().sum::<f64>() / nf;
    let mean_b = b.iter().sum::<f64>() / nf;
    let residuals = [
        (gamma - (gamma + linear + degenerate)).abs(),
        (mean_a - gamma).abs(),
        (mean_b - gamma).abs(),
    ];
    Ok(residuals.into_iter().fold(0.0, f64::max))
}
