use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use super::linsolve::{pcg, Cholesky, DIRECT_THRESHOLD};
use super::vecops::{axpy, dot, norm, normalize, scale};
use super::{Normalization, SolverConfig, SpectralPair};
use crate::error::{Error, Result};
use crate::graph::SymMatrix;

/// Inner CG accuracy; inverse iteration needs solves well below the outer
/// residual tolerance.
const INNER_RTOL: f64 = 1e-14;

enum Inner {
    Direct(Cholesky),
    Iterative,
}

/// Smallest eigenpair of a symmetric positive definite matrix (a grounded
/// Laplacian of a connected graph).
///
/// The eigenvector is sign-fixed so its largest-magnitude entry is positive,
/// scaled to `‖x‖∞ = 1`, and entries in `[−tol, 0)` are clamped to zero.
/// The all-ones start is tried first (the Perron vector always has a
/// positive overlap with it), then a seeded random start.
pub fn smallest_grounded_eigenpair(m: &SymMatrix, cfg: &SolverConfig) -> Result<SpectralPair> {
    cfg.validate()?;
    let dim = m.dim();
    if dim == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let shift = cfg.shift.unwrap_or(0.0);
    let inner = if dim <= DIRECT_THRESHOLD {
        Inner::Direct(Cholesky::factor(m, shift)?)
    } else {
        Inner::Iterative
    };

    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let random_start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 0.5).collect();
    let starts = [vec![1.0; dim], random_start];

    let mut best: Option<(usize, f64)> = None;
    let mut total_iterations = 0;
    for start in starts {
        match iterate(m, &inner, shift, start, cfg) {
            Ok((lambda, x, res, its)) => {
                return Ok(finalize(
                    lambda,
                    x,
                    res,
                    total_iterations + its,
                    cfg.tolerance,
                ));
            }
            Err(Error::NotConverged {
                iterations,
                residual,
            }) => {
                total_iterations += iterations;
                if best.is_none_or(|(_, r)| residual < r) {
                    best = Some((total_iterations, residual));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (_, residual) = best.expect("at least one start was tried");
    Err(Error::NotConverged {
        iterations: total_iterations,
        residual,
    })
}

fn iterate(
    m: &SymMatrix,
    inner: &Inner,
    shift: f64,
    start: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let dim = m.dim();
    let floor = 1e-13 * m.gershgorin_bound().max(1.0);
    let mut x = start;
    normalize(&mut x);
    let mut theta = super::rayleigh_quotient(m, &x);
    let mut best_res = f64::INFINITY;
    let mut mx = vec![0.0; dim];
    for it in 1..=cfg.max_iterations {
        let mut y = match inner {
            Inner::Direct(chol) => chol.solve(&x),
            Inner::Iterative => {
                // x / (θ − σ) is the exact solution once x is an eigenvector
                let guess: Vec<f64> = if theta - shift > floor {
                    x.iter().map(|v| v / (theta - shift)).collect()
                } else {
                    vec![0.0; dim]
                };
                pcg(m, shift, &x, Some(&guess), INNER_RTOL, 10 * dim + 200)?.x
            }
        };
        if normalize(&mut y) == 0.0 || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        x = y;
        m.mul_vec_into(&x, &mut mx);
        theta = dot(&x, &mx);
        if theta <= floor {
            return Err(Error::NotPositiveDefinite);
        }
        axpy(&mut mx, -theta, &x);
        let res = norm(&mx);
        best_res = best_res.min(res);
        if res <= cfg.tolerance {
            return Ok((theta, x, res, it));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        residual: best_res,
    })
}

fn finalize(
    lambda: f64,
    mut x: Vec<f64>,
    residual: f64,
    iterations: usize,
    tol: f64,
) -> SpectralPair {
    let (idx, _) =
        x.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, &v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
        );
    let pivot = x[idx];
    scale(&mut x, 1.0 / pivot);
    for v in &mut x {
        if *v < 0.0 && *v >= -tol {
            *v = 0.0;
        }
    }
    SpectralPair {
        eigenvalue: lambda,
        eigenvector: x,
        residual,
        iterations,
        normalization: Normalization::InfNormOne,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path, Graph, GroundedSystem};

    fn grounded(g: Graph, s: &[usize]) -> SymMatrix {
        GroundedSystem::new(g, s.to_vec())
            .unwrap()
            .grounded_laplacian()
    }

    #[test]
    fn triangle_uniform_vector() {
        let pair =
            smallest_grounded_eigenpair(&grounded(complete(3), &[2]), &SolverConfig::default())
                .unwrap();
        assert!((pair.eigenvalue - 1.0).abs() < 1e-12);
        for v in &pair.eigenvector {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn path_golden_ratio() {
        let pair = smallest_grounded_eigenpair(&grounded(path(3), &[2]), &SolverConfig::default())
            .unwrap();
        let expect = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((pair.eigenvalue - expect).abs() < 1e-12);
        assert!((pair.eigenvector[0] - 1.0).abs() < 1e-10);
        assert!((pair.eigenvector[1] - 0.618_033_988_749_895).abs() < 1e-9);
        assert!(pair.residual <= 1e-10);
    }

    #[test]
    fn complete_graph_eigenvalue_one() {
        for n in [2, 5, 40, 200] {
            let pair =
                smallest_grounded_eigenpair(&grounded(complete(n), &[0]), &SolverConfig::default())
                    .unwrap();
            assert!((pair.eigenvalue - 1.0).abs() < 1e-10, "n = {n}");
            assert!(pair.x_min() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn cg_path_matches_direct() {
        // 300 floating vertices forces the iterative inner solver
        let g = Graph::new(
            301,
            (0..300)
                .map(|i| (i, i + 1))
                .chain((0..299).map(|i| (i, i + 2))),
        )
        .unwrap();
        let lg = grounded(g, &[0]);
        let pair = smallest_grounded_eigenpair(&lg, &SolverConfig::default()).unwrap();
        assert!(pair.residual <= 1e-10);
        assert!(pair.x_min() >= 0.0);
        let lq = super::super::rayleigh_quotient(&lg, &pair.eigenvector);
        assert!((lq - pair.eigenvalue).abs() < 1e-10);
    }

    #[test]
    fn disconnected_input_is_rejected() {
        // component {2, 3} has no grounded vertex, so L_g is singular
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let err = smallest_grounded_eigenpair(&grounded(g, &[0]), &SolverConfig::default());
        assert_eq!(err, Err(Error::NotPositiveDefinite));

        let big = Graph::new(
            400,
            (1..199)
                .map(|i| (i, i + 1))
                .chain((200..399).map(|i| (i, i + 1)))
                .chain([(0, 1)]),
        )
        .unwrap();
        let err = smallest_grounded_eigenpair(&grounded(big, &[0]), &SolverConfig::default());
        assert!(err.is_err());
    }
}
