//! Symmetric positive definite solves: dense Cholesky for small systems,
//! Jacobi-preconditioned conjugate gradient otherwise.

use super::vecops::{axpy, dot, norm};
use crate::error::{Error, Result};
use crate::graph::SymMatrix;

/// Systems up to this dimension are factorised densely.
pub const DIRECT_THRESHOLD: usize = 128;

/// Relative pivot floor below which a factorisation is declared singular.
const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factorises `m - shift * I`.
    pub(crate) fn factor(m: &SymMatrix, shift: f64) -> Result<Self> {
        let dim = m.dim();
        let mut a = m.to_dense();
        for i in 0..dim {
            a[i * dim + i] -= shift;
        }
        let scale = (0..dim)
            .map(|i| a[i * dim + i].abs())
            .fold(0.0, f64::max)
            .max(1.0);
        for j in 0..dim {
            let mut pivot = a[j * dim + j];
            for k in 0..j {
                pivot -= a[j * dim + k] * a[j * dim + k];
            }
            if !(pivot > PIVOT_FLOOR * scale) {
                return Err(Error::NotPositiveDefinite);
            }
            let pivot = pivot.sqrt();
            a[j * dim + j] = pivot;
            for i in j + 1..dim {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= a[i * dim + k] * a[j * dim + k];
                }
                a[i * dim + j] = s / pivot;
            }
        }
        Ok(Cholesky { dim, lower: a })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned CG on `(m - shift I) x = b`.
///
/// Stops when `‖r‖ <= rtol ‖b‖` or after `max_iter` steps; the caller
/// decides whether an unconverged outcome is acceptable. Nonpositive
/// curvature is reported as [`Error::NotPositiveDefinite`].
pub(crate) fn pcg(
    m: &SymMatrix,
    shift: f64,
    b: &[f64],
    x0: Option<&[f64]>,
    rtol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = m.dim();
    let inv_diag: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|&d| d as f64 - shift)
        .map(|d| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::NotPositiveDefinite)
            }
        })
        .collect::<Result<_>>()?;
    let apply = |v: &[f64], out: &mut [f64]| {
        m.mul_vec_into(v, out);
        if shift != 0.0 {
            axpy(out, -shift, v);
        }
    };

    let bnorm = norm(b);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ap = vec![0.0; n];
    apply(&x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = norm(&r) / bnorm;
    let mut it = 0;
    while it < max_iter && rel > rtol {
        apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let step = rz / curvature;
        axpy(&mut x, step, &p);
        axpy(&mut r, -step, &ap);
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rel = norm(&r) / bnorm;
        it += 1;
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: rel,
    })
}

/// Solves `m x = b` for symmetric positive definite `m`.
///
/// Uses a dense factorisation up to [`DIRECT_THRESHOLD`], CG above it. CG
/// that fails to reach `rtol` is an error.
pub fn solve_spd(m: &SymMatrix, b: &[f64], rtol: f64) -> Result<Vec<f64>> {
    if b.len() != m.dim() {
        return Err(Error::InvalidInput(format!(
            "right-hand side has length {} but matrix has dimension {}",
            b.len(),
            m.dim()
        )));
    }
    if m.dim() <= DIRECT_THRESHOLD {
        return Ok(Cholesky::factor(m, 0.0)?.solve(b));
    }
    let max_iter = 10 * m.dim() + 200;
    let out = pcg(m, 0.0, b, None, rtol, max_iter)?;
    if out.relative_residual > rtol {
        return Err(Error::NotConverged {
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    Ok(out.x)
}
