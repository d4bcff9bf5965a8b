//! Exact cyclic coordinate ascent for the step-function rank objectives.
//!
//! Along coordinate `k` the index of observation `i` is `c_i + t x_ik`, so a
//! pairwise indicator can only flip where two such lines cross. Between
//! consecutive crossings the objective is constant. Each coordinate step
//! sorts the crossings once, evaluates the first segment directly and then
//! walks the crossings left to right, updating the pair sum by the change of
//! the pairs that swap order. This makes a coordinate step `O(n² log n)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sample::{validate_sample, Beta, EstimatorSpec, Sample, SearchDomain};
use crate::ustat::{check_beta, ObjectiveValue, PairWeights};

pub const DEFAULT_MAX_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub init: Vec<f64>,
    pub max_sweeps: usize,
    pub domain: SearchDomain,
}

impl FitOptions {
    /// Starts at `init` with the default box `init ± 10`.
    pub fn new(init: Vec<f64>) -> Self {
        let domain = SearchDomain::around(&init);
        Self {
            init,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            domain,
        }
    }

    /// Starts at the origin.
    pub fn zeros(p: usize) -> Self {
        Self::new(alloc::vec![0.0; p])
    }

    pub fn with_domain(self, domain: SearchDomain) -> Self {
        Self { domain, ..self }
    }

    pub fn with_max_sweeps(self, max_sweeps: usize) -> Self {
        Self { max_sweeps, ..self }
    }

    fn check(&self, p: usize) -> Result<()> {
        if self.init.len() != p {
            return Err(Error::DimensionMismatch {
                what: "initial point",
                expected: p,
                got: self.init.len(),
            });
        }
        if self.domain.dim() != p {
            return Err(Error::DimensionMismatch {
                what: "search domain",
                expected: p,
                got: self.domain.dim(),
            });
        }
        if let Some(k) = (0..p).find(|&k| {
            !(self.domain.lo()[k] <= self.init[k] && self.init[k] <= self.domain.hi()[k])
        }) {
            return Err(Error::InvalidDomain { coordinate: k });
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub objective: ObjectiveValue,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Objective at the initial point followed by its value after each sweep.
    pub trace: Vec<f64>,
}

/// Index with coordinate `k`'s contribution left out, summed in a fixed order
/// so the same `β` always yields bit-identical values.
fn partial_index(sample: &Sample, beta: &Beta, k: usize) -> Vec<f64> {
    let mut c = sample.column(0).to_vec();
    for (l, &coef) in beta.full().iter().enumerate().skip(1) {
        if l == k {
            continue;
        }
        for (ci, &x) in c.iter_mut().zip(sample.column(l)) {
            *ci += coef * x;
        }
    }
    c
}

fn check_coordinate(sample: &Sample, k: usize) -> Result<()> {
    if k == 0 || k > sample.p() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: sample.p() + 1,
        });
    }
    Ok(())
}

/// A pair crossing along one coordinate.
#[derive(Clone, Copy)]
struct Crossing {
    t: f64,
    i: u32,
    j: u32,
}

fn crossings(c: &[f64], xk: &[f64], lo: f64, hi: f64) -> Vec<Crossing> {
    let n = c.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = xk[i] - xk[j];
            if dx == 0.0 {
                continue;
            }
            let t = -(c[i] - c[j]) / dx;
            if lo <= t && t <= hi {
                out.push(Crossing {
                    t,
                    i: i as u32,
                    j: j as u32,
                });
            }
        }
    }
    out.sort_unstable_by(|a, b| a.t.total_cmp(&b.t).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    out
}

/// Sorted, deduplicated values of `θ_k` in `[lo_k, hi_k]` at which some pair
/// of observations swaps order in `X'β`. `k` is 1-based.
pub fn coordinate_breakpoints(
    sample: &Sample,
    beta: &Beta,
    k: usize,
    domain: &SearchDomain,
) -> Result<Vec<f64>> {
    check_beta(sample, beta)?;
    check_coordinate(sample, k)?;
    let c = partial_index(sample, beta, k);
    let mut ts: Vec<f64> = crossings(
        &c,
        sample.column(k),
        domain.lo()[k - 1],
        domain.hi()[k - 1],
    )
    .into_iter()
    .map(|x| x.t)
    .collect();
    ts.dedup_by(|a, b| a == b);
    Ok(ts)
}

struct CoordinateSearch<'s> {
    sample: &'s Sample,
    weights: PairWeights<'s>,
}

impl<'s> CoordinateSearch<'s> {
    fn index_at(&self, c: &[f64], xk: &[f64], t: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(c.iter().zip(xk).map(|(ci, xi)| ci + t * xi));
    }

    fn value_at(&self, c: &[f64], xk: &[f64], t: f64, buf: &mut Vec<f64>) -> f64 {
        self.index_at(c, xk, t, buf);
        self.weights.pair_sum(buf).as_f64()
    }

    /// Returns the new `θ_k` and the objective pair sum there.
    fn maximize(&self, beta: &Beta, k: usize, lo: f64, hi: f64) -> (f64, f64) {
        let current = beta.full()[k];
        let c = partial_index(self.sample, beta, k);
        let xk = self.sample.column(k);
        let mut buf = Vec::with_capacity(c.len());
        let current_value = self.value_at(&c, xk, current, &mut buf);

        // Crossings at lo are already reflected in the first segment and
        // crossings at hi never take effect inside the box.
        let events: Vec<Crossing> = crossings(&c, xk, lo, hi)
            .into_iter()
            .filter(|e| lo < e.t && e.t < hi)
            .collect();
        let mut bounds = Vec::with_capacity(events.len() + 2);
        bounds.push(lo);
        let mut group_starts = Vec::with_capacity(events.len() + 1);
        for (e, ev) in events.iter().enumerate() {
            if ev.t > *bounds.last().unwrap() {
                bounds.push(ev.t);
                group_starts.push(e);
            }
        }
        bounds.push(hi);
        if bounds.len() == 2 {
            // No crossing strictly inside the box: the section is flat.
            return (current, current_value);
        }

        // Segment s spans bounds[s]..bounds[s+1]; crossings at bounds[s]
        // (s >= 1) are applied on entering it.
        let segments = bounds.len() - 1;
        let mid = |s: usize| 0.5 * (bounds[s] + bounds[s + 1]);
        let mut values = Vec::with_capacity(segments);
        let mut running = self.value_at(&c, xk, mid(0), &mut buf);
        values.push(running);
        group_starts.push(events.len());
        for s in 1..segments {
            let from = group_starts[s - 1];
            let to = group_starts[s];
            for ev in &events[from..to] {
                let (i, j) = (ev.i as usize, ev.j as usize);
                let (w_ij, w_ji) = (self.weights.weight(i, j), self.weights.weight(j, i));
                // Past the crossing, u_i > u_j iff x_ik > x_jk.
                running += if xk[i] > xk[j] { w_ij - w_ji } else { w_ji - w_ij };
            }
            values.push(running);
        }

        let best = if self.weights.is_integer() {
            // Sums of 0/1 weights are exact in f64.
            let mut best = 0;
            for s in 1..segments {
                if values[s] > values[best] {
                    best = s;
                }
            }
            (mid(best), values[best])
        } else {
            let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-9 * scale;
            let mut best: Option<(f64, f64)> = None;
            for s in 0..segments {
                if values[s] >= top - tol {
                    let t = mid(s);
                    let v = self.value_at(&c, xk, t, &mut buf);
                    if best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((t, v));
                    }
                }
            }
            best.unwrap()
        };

        if best.1 > current_value {
            let exact = self.value_at(&c, xk, best.0, &mut buf);
            (best.0, exact)
        } else {
            (current, current_value)
        }
    }
}

/// Exact maximizer of the objective along coordinate `k` (1-based) within
/// the box.
///
/// Every segment between consecutive breakpoints (and the two end segments
/// clipped to the box) is scored at its midpoint. The coordinate moves only
/// if some segment beats the current point strictly; among the best
/// segments the leftmost wins and its midpoint is returned. Returns the new
/// `θ_k` and the objective value there.
pub fn maximize_coordinate(
    sample: &Sample,
    spec: &EstimatorSpec,
    beta: &Beta,
    k: usize,
    domain: &SearchDomain,
) -> Result<(f64, f64)> {
    validate_sample(sample, spec)?;
    check_beta(sample, beta)?;
    check_coordinate(sample, k)?;
    if domain.dim() != sample.p() {
        return Err(Error::DimensionMismatch {
            what: "search domain",
            expected: sample.p(),
            got: domain.dim(),
        });
    }
    let search = CoordinateSearch {
        sample,
        weights: PairWeights::new(sample, spec),
    };
    let (t, sum) = search.maximize(beta, k, domain.lo()[k - 1], domain.hi()[k - 1]);
    let n = sample.n() as f64;
    Ok((t, sum / (n * (n - 1.0))))
}

/// Cyclic exact coordinate ascent from `opts.init`.
///
/// Sweeps visit `θ_1..θ_p` in order and accept each move immediately. The
/// fit has converged once a full sweep leaves every coordinate unchanged.
pub fn fit(sample: &Sample, spec: &EstimatorSpec, opts: &FitOptions) -> Result<FitResult> {
    validate_sample(sample, spec)?;
    opts.check(sample.p())?;
    let n = sample.n();
    let search = CoordinateSearch {
        sample,
        weights: PairWeights::new(sample, spec),
    };
    let mut beta = Beta::from_theta(&opts.init);
    let initial = search.weights.pair_sum(&sample.index(&beta));
    let to_value = |sum: f64| sum / (n * (n - 1)) as f64;
    let mut trace = alloc::vec![initial.into_value(n).value];

    let mut converged = false;
    let mut sweeps_used = 0;
    while sweeps_used < opts.max_sweeps {
        sweeps_used += 1;
        let mut changed = false;
        let mut value = trace[trace.len() - 1];
        for k in 1..=sample.p() {
            let (t, sum) =
                search.maximize(&beta, k, opts.domain.lo()[k - 1], opts.domain.hi()[k - 1]);
            if t.to_bits() != beta.full()[k].to_bits() {
                beta.set(k, t);
                changed = true;
            }
            value = to_value(sum);
        }
        trace.push(value);
        if !changed {
            converged = true;
            break;
        }
    }

    let objective = search.weights.pair_sum(&sample.index(&beta)).into_value(n);
    Ok(FitResult {
        theta_hat: beta.theta().to_vec(),
        objective,
        sweeps_used,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_crossing() {
        // x1 = c (the partial index since θ_1 multiplies x2), x2 = coordinate column.
        let s = Sample::from_columns(vec![1.0, 0.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = SearchDomain::around(&[0.0]);
        let b = coordinate_breakpoints(&s, &Beta::from_theta(&[0.0]), 1, &d).unwrap();
        assert_eq!(b, [1.0]);
    }

    #[test]
    fn equal_column_has_no_breakpoints() {
        let s = Sample::from_columns(
            vec![1.0, 0.0, 2.0],
            &[vec![0.0, 1.0, 3.0], vec![2.0, 2.0, 2.0]],
        )
        .unwrap();
        let d = SearchDomain::around(&[0.5]);
        let beta = Beta::from_theta(&[0.5]);
        assert!(coordinate_breakpoints(&s, &beta, 1, &d).unwrap().is_empty());
        let (t, v) = maximize_coordinate(&s, &EstimatorSpec::mrc(), &beta, 1, &d).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(v, 2.0 / 6.0);
    }

    #[test]
    fn coordinate_index_checked() {
        let s = Sample::from_columns(vec![1.0, 0.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = SearchDomain::around(&[0.0]);
        let b = Beta::from_theta(&[0.0]);
        assert!(matches!(
            coordinate_breakpoints(&s, &b, 0, &d),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            coordinate_breakpoints(&s, &b, 2, &d),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn constant_response_returns_init() {
        let s = Sample::from_columns(
            vec![1.0; 4],
            &[vec![0.0, 1.0, 3.0, -1.0], vec![2.0, -2.0, 0.5, 1.0]],
        )
        .unwrap();
        let r = fit(&s, &EstimatorSpec::mrc(), &FitOptions::new(vec![0.3])).unwrap();
        assert_eq!(r.theta_hat, [0.3]);
        assert!(r.converged);
        assert_eq!(r.sweeps_used, 1);
        assert_eq!(r.objective.value, 0.0);
    }

    #[test]
    fn init_outside_domain_rejected() {
        let s = Sample::from_columns(vec![1.0, 0.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let opts = FitOptions::new(vec![0.0])
            .with_domain(SearchDomain::new(vec![1.0], vec![2.0]).unwrap());
        assert!(matches!(
            fit(&s, &EstimatorSpec::mrc(), &opts),
            Err(Error::InvalidDomain { coordinate: 0 })
        ));
    }
}
