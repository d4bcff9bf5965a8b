//! Dense helpers for the small `p × p` matrices of the covariance estimator.
//! Matrices are row-major `Vec<f64>`.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) fn matmul(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for k in 0..p {
            let aik = a[i * p + k];
            for j in 0..p {
                out[i * p + j] += aik * b[k * p + j];
            }
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            out[j * p + i] = a[i * p + j];
        }
    }
    out
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix whose columns are the eigenvectors.
pub(crate) fn symmetric_eigen(a: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut q = vec![0.0; p * p];
    for i in 0..p {
        q[i * p + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * p + j] * m[i * p + j])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for r in 0..p {
            for s in r + 1..p {
                let ars = m[r * p + s];
                if ars == 0.0 {
                    continue;
                }
                let theta = (m[s * p + s] - m[r * p + r]) / (2.0 * ars);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..p {
                    let mkr = m[k * p + r];
                    let mks = m[k * p + s];
                    m[k * p + r] = c * mkr - sn * mks;
                    m[k * p + s] = sn * mkr + c * mks;
                }
                for k in 0..p {
                    let mrk = m[r * p + k];
                    let msk = m[s * p + k];
                    m[r * p + k] = c * mrk - sn * msk;
                    m[s * p + k] = sn * mrk + c * msk;
                }
                for k in 0..p {
                    let qkr = q[k * p + r];
                    let qks = q[k * p + s];
                    q[k * p + r] = c * qkr - sn * qks;
                    q[k * p + s] = sn * qkr + c * qks;
                }
            }
        }
    }
    ((0..p).map(|i| m[i * p + i]).collect(), q)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub(crate) fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum();
            if i == j {
                let d = a[i * p + i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i * p + i] = libm::sqrt(d);
            } else {
                l[i * p + j] = (a[i * p + j] - s) / l[j * p + j];
            }
        }
    }
    Some(l)
}
