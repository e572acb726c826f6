//! Dense cyclic Jacobi eigendecomposition; the brute-force oracle.

use super::{residual, Normalization, SpectralPair};
use crate::error::{Error, Result};
use crate::graph::SymMatrix;

pub const DEFAULT_DENSE_CAP: usize = 400;

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition, eigenvalues ascending.
///
/// Sweeps continue until the off-diagonal Frobenius norm of the rotated
/// matrix is at most `1e-14 · max(1, ‖M‖_F)`. Eigenvectors have unit 2-norm
/// with their largest-magnitude entry positive.
pub fn dense_spectrum_oracle(m: &SymMatrix, cap: usize) -> Result<Vec<SpectralPair>> {
    let n = m.dim();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "dense Jacobi oracle",
            size: n,
            cap,
        });
    }
    let mut a = m.to_dense();
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1.0);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && off_diagonal_norm(&a, n) > tol {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    let residual_off = off_diagonal_norm(&a, n);
    if residual_off > tol {
        return Err(Error::NotConverged {
            iterations: sweeps,
            residual: residual_off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    Ok(order
        .into_iter()
        .map(|j| {
            let lambda = a[j * n + j];
            let mut x: Vec<f64> = (0..n).map(|i| v[i * n + j]).collect();
            let big = x
                .iter()
                .copied()
                .fold(0.0f64, |acc, t| if t.abs() > acc.abs() { t } else { acc });
            if big < 0.0 {
                x.iter_mut().for_each(|t| *t = -*t);
            }
            SpectralPair {
                eigenvalue: lambda,
                residual: residual(m, lambda, &x),
                eigenvector: x,
                iterations: sweeps,
                normalization: Normalization::TwoNormOne,
            }
        })
        .collect())
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    s.sqrt()
}

/// Applies the rotation that zeroes `a[p][q]`, accumulating it into `v`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
