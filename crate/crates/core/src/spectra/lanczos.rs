//! Restarted Lanczos with full reorthogonalisation.
//!
//! Used for the extreme eigenvalues of a Laplacian restricted to the
//! complement of the all-ones vector. Each cycle builds a Krylov basis of at
//! most [`MAX_BASIS`] vectors, extracts the wanted Ritz pair from the
//! tridiagonal projection, and restarts from that Ritz vector until the true
//! residual is below tolerance.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use super::vecops::{axpy, deflate_ones, dot, norm, normalize};
use super::{residual, Normalization, SolverConfig, SpectralPair};
use crate::error::{Error, Result};
use crate::graph::SymMatrix;

const MAX_BASIS: usize = 160;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Which {
    Smallest,
    Largest,
}

/// Second-smallest eigenvalue of a graph Laplacian and its eigenvector
/// (unit 2-norm, orthogonal to the all-ones vector).
///
/// The iteration is deflated against the all-ones vector at every step. A
/// disconnected pattern gives `λ₂ = 0` exactly, with the eigenvector taken as
/// the balanced difference of the first component's indicator and the rest.
pub fn algebraic_connectivity(l: &SymMatrix, cfg: &SolverConfig) -> Result<SpectralPair> {
    cfg.validate()?;
    let n = l.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "algebraic connectivity needs at least 2 vertices".into(),
        ));
    }
    if let Some(i) = (0..n).find(|&i| l.row_sum(i) != 0) {
        return Err(Error::InvalidInput(format!(
            "row {i} does not sum to zero; not a graph Laplacian"
        )));
    }
    let comps = l.pattern_components();
    if comps.len() > 1 {
        let first = &comps[0];
        let k = first.len() as f64;
        let rest = n as f64 - k;
        let mut x = vec![-1.0 / rest; n];
        for &v in first {
            x[v] = 1.0 / k;
        }
        normalize(&mut x);
        return Ok(SpectralPair {
            eigenvalue: 0.0,
            residual: residual(l, 0.0, &x),
            eigenvector: x,
            iterations: 0,
            normalization: Normalization::TwoNormOne,
        });
    }
    extreme_pair(l, true, Which::Smallest, cfg)
}

/// Largest eigenpair, optionally restricted to the complement of the
/// all-ones vector.
pub fn largest_eigenpair(m: &SymMatrix, deflate: bool, cfg: &SolverConfig) -> Result<SpectralPair> {
    cfg.validate()?;
    if m.dim() < 1 + deflate as usize {
        return Err(Error::InvalidInput("matrix too small".into()));
    }
    extreme_pair(m, deflate, Which::Largest, cfg)
}

fn extreme_pair(
    m: &SymMatrix,
    deflate: bool,
    which: Which,
    cfg: &SolverConfig,
) -> Result<SpectralPair> {
    let n = m.dim();
    let space = n - deflate as usize;
    let basis = space.min(MAX_BASIS);
    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut best = f64::INFINITY;
    for cycle in 1..=cfg.max_iterations {
        let (theta, y) = cycle_once(m, deflate, which, &start, basis);
        let res = residual(m, theta, &y);
        best = best.min(res);
        if res <= cfg.tolerance || (basis == space && res <= 1e3 * cfg.tolerance.max(1e-13)) {
            return Ok(SpectralPair {
                eigenvalue: theta,
                eigenvector: y,
                residual: res,
                iterations: cycle,
                normalization: Normalization::TwoNormOne,
            });
        }
        start = y;
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: best,
    })
}

/// One Lanczos cycle; returns the wanted Ritz value and unit Ritz vector.
fn cycle_once(
    m: &SymMatrix,
    deflate: bool,
    which: Which,
    start: &[f64],
    basis: usize,
) -> (f64, Vec<f64>) {
    let n = m.dim();
    let mut q0 = start.to_vec();
    if deflate {
        deflate_ones(&mut q0);
    }
    if normalize(&mut q0) == 0.0 {
        q0 = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        if deflate {
            deflate_ones(&mut q0);
        }
        normalize(&mut q0);
    }
    let scale = m.gershgorin_bound().max(1.0);
    let mut qs: Vec<Vec<f64>> = vec![q0];
    let mut alphas: Vec<f64> = Vec::with_capacity(basis);
    let mut betas: Vec<f64> = Vec::with_capacity(basis);
    let mut w = vec![0.0; n];
    for j in 0..basis {
        m.mul_vec_into(&qs[j], &mut w);
        if deflate {
            deflate_ones(&mut w);
        }
        let alpha = dot(&qs[j], &w);
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &qs {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
            if deflate {
                deflate_ones(&mut w);
            }
        }
        let beta = norm(&w);
        if j + 1 == basis || beta <= 1e-12 * scale {
            break;
        }
        betas.push(beta);
        qs.push(w.iter().map(|v| v / beta).collect());
    }

    let k = alphas.len();
    let mut d = alphas;
    let mut e = betas;
    e.resize(k, 0.0);
    let mut z = vec![0.0; k * k];
    for i in 0..k {
        z[i * k + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, &mut z);
    let pick = (0..k)
        .reduce(|a, b| match which {
            Which::Smallest if d[b] < d[a] => b,
            Which::Largest if d[b] > d[a] => b,
            _ => a,
        })
        .expect("nonempty basis");
    let mut y = vec![0.0; n];
    for (i, q) in qs.iter().take(k).enumerate() {
        axpy(&mut y, z[i * k + pick], q);
    }
    if deflate {
        deflate_ones(&mut y);
    }
    normalize(&mut y);
    (d[pick], y)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` the entry at `(i, i+1)` (last entry
/// ignored). On return `d` holds eigenvalues and column `j` of the row-major
/// `z` (initially the identity) the corresponding eigenvector.
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..n {
                    let zf = z[row * n + i + 1];
                    let zi = z[row * n + i];
                    z[row * n + i + 1] = s * zi + c * zf;
                    z[row * n + i] = c * zi - s * zf;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
