//! Thick-restart Lanczos for Hermitian operators.

use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::HamiltonianMatrix;

pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[c64], y: &mut [c64]);
}

impl HermitianOperator for HamiltonianMatrix {
    fn dim(&self) -> usize {
        HamiltonianMatrix::dim(self)
    }

    fn apply(&self, x: &[c64], y: &mut [c64]) {
        HamiltonianMatrix::apply(self, x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub nev: usize,
    pub basis_size: usize,
    /// Converged when the residual estimate is below `tol · max|θ|`.
    pub tol: f64,
    pub max_restarts: usize,
    pub target: Target,
}

impl LanczosOptions {
    pub fn new(nev: usize, target: Target) -> Self {
        Self { nev, basis_size: (3 * nev).max(nev + 30), tol: 1e-12, max_restarts: 500, target }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Ritz values ordered from the targeted end inwards.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<c64>>,
    pub residual_estimates: Vec<f64>,
    pub restarts: usize,
    pub applications: usize,
}

/// Deterministic start vector from two Weyl sequences.
fn start_vector(n: usize, salt: usize) -> Vec<c64> {
    const A: f64 = 0.618_033_988_749_894_9;
    const B: f64 = 0.414_213_562_373_095_1;
    (0..n)
        .map(|i| {
            let t = (i + 1 + 7919 * salt) as f64;
            c64::new((t * A).fract() - 0.5, (t * B).fract() - 0.5)
        })
        .collect()
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.par_iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: c64, x: &[c64], y: &mut [c64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthogonalizes `w` against `basis` twice, returning the accumulated
/// projection coefficients.
fn orthogonalize(basis: &[Vec<c64>], w: &mut [c64]) -> Vec<c64> {
    let mut coeffs = vec![c64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        for (i, v) in basis.iter().enumerate() {
            let c = dot(v, w);
            axpy(-c, v, w);
            coeffs[i] += c;
        }
    }
    coeffs
}

pub fn thick_restart_lanczos(op: &dyn HermitianOperator, opts: LanczosOptions) -> Result<LanczosResult> {
    let n = op.dim();
    let nev = opts.nev.min(n);
    if nev == 0 {
        return Ok(LanczosResult { values: vec![], vectors: vec![], residual_estimates: vec![], restarts: 0, applications: 0 });
    }
    let m = opts.basis_size.max(nev + 2).min(n);

    let mut basis: Vec<Vec<c64>> = Vec::with_capacity(m + 1);
    let mut v0 = start_vector(n, 0);
    let nv = norm(&v0);
    v0.iter_mut().for_each(|x| *x /= nv);
    basis.push(v0);

    // projected matrix, upper triangle filled column by column
    let mut t = Mat::<c64>::zeros(m, m);
    let mut kept = 0usize;
    let mut applications = 0usize;
    let mut salt = 1usize;
    let mut w = vec![c64::new(0.0, 0.0); n];

    for restart in 0..=opts.max_restarts {
        let mut residual_norm = 0.0;
        let mut residual = vec![c64::new(0.0, 0.0); n];
        for j in kept..m {
            op.apply(&basis[j], &mut w);
            applications += 1;
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.iter().enumerate().take(j + 1) {
                t[(i, j)] = *c;
            }
            let beta = norm(&w);
            if j + 1 == m {
                residual_norm = beta;
                residual.copy_from_slice(&w);
                break;
            }
            let scale = t[(j, j)].norm().max(1.0);
            let next = if beta > 1e-12 * scale {
                w.iter().map(|x| x / beta).collect()
            } else {
                // invariant subspace: continue with a fresh orthogonal direction
                let mut fresh = start_vector(n, salt);
                salt += 1;
                orthogonalize(&basis, &mut fresh);
                let nf = norm(&fresh);
                fresh.iter_mut().map(|x| *x / nf).collect()
            };
            basis.push(next);
        }

        let hermitian = Mat::from_fn(m, m, |a, b| if a <= b { t[(a, b)] } else { t[(b, a)].conj() });
        let evd = hermitian.self_adjoint_eigen(Side::Upper).map_err(|e| Error::Convergence {
            message: format!("projected eigenproblem failed: {e:?}"),
            residual: f64::NAN,
        })?;
        let theta: Vec<f64> = (0..m).map(|i| evd.S().column_vector()[i].re).collect();
        let s = evd.U();
        let order: Vec<usize> = match opts.target {
            Target::Smallest => (0..m).collect(),
            Target::Largest => (0..m).rev().collect(),
        };
        let scale = theta.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let estimates: Vec<f64> = order.iter().take(nev).map(|&i| residual_norm * s[(m - 1, i)].norm()).collect();
        let converged = estimates.iter().all(|r| *r <= opts.tol * scale);

        let ritz = |cols: &[usize]| -> Vec<Vec<c64>> {
            cols.par_iter()
                .map(|&c| {
                    let mut y = vec![c64::new(0.0, 0.0); n];
                    for (j, v) in basis.iter().enumerate() {
                        axpy(s[(j, c)], v, &mut y);
                    }
                    y
                })
                .collect()
        };

        if converged || restart == opts.max_restarts || m == n {
            let wanted: Vec<usize> = order.iter().take(nev).copied().collect();
            let worst = estimates.iter().copied().fold(0.0, f64::max);
            if !converged && m < n {
                return Err(Error::Convergence {
                    message: format!("Lanczos did not converge after {restart} restarts"),
                    residual: worst,
                });
            }
            return Ok(LanczosResult {
                values: wanted.iter().map(|&i| theta[i]).collect(),
                vectors: ritz(&wanted),
                residual_estimates: estimates,
                restarts: restart,
                applications,
            });
        }

        // keep the best Ritz vectors plus the residual direction
        kept = (nev + (m - nev) / 2).min(m - 1);
        let keep: Vec<usize> = order.iter().take(kept).copied().collect();
        let mut new_basis = ritz(&keep);
        t = Mat::<c64>::zeros(m, m);
        for (a, &i) in keep.iter().enumerate() {
            t[(a, a)] = c64::new(theta[i], 0.0);
        }
        if residual_norm > 1e-14 * scale {
            residual.iter_mut().for_each(|x| *x /= residual_norm);
        } else {
            residual = start_vector(n, salt);
            salt += 1;
        }
        orthogonalize(&new_basis, &mut residual);
        let nr = norm(&residual);
        residual.iter_mut().for_each(|x| *x /= nr);
        new_basis.push(residual);
        basis = new_basis;
    }
    unreachable!("the restart loop always returns")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Vec<f64>);

    impl HermitianOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[c64], y: &mut [c64]) {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = xi * d;
            }
        }
    }

    #[test]
    fn diagonal_extremes() {
        let op = Diagonal((0..400).map(|i| (i as f64).sqrt()).collect());
        let small = thick_restart_lanczos(&op, LanczosOptions::new(4, Target::Smallest)).unwrap();
        for (i, v) in small.values.iter().enumerate() {
            assert!((v - (i as f64).sqrt()).abs() < 1e-9, "{v}");
        }
        let large = thick_restart_lanczos(&op, LanczosOptions::new(3, Target::Largest)).unwrap();
        assert!((large.values[0] - 399f64.sqrt()).abs() < 1e-9);
    }
}
