//! Eigendecomposition, spectral propagation, perturbation theory and the
//! variational droplet ansatz.

mod lanczos;
mod perturbation;
mod propagate;
mod shift_invert;
mod variational;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Side};
use num_complex::Complex64 as c64;

pub use lanczos::{thick_restart_lanczos, HermitianOperator, LanczosOptions, LanczosResult, Target};
pub use perturbation::{first_order_perturbation, PerturbedLevel};
pub use propagate::{propagate, propagate_with, TimeGrid};
pub use shift_invert::{schur_complement, DenseShiftInvert, SchurShiftInvert};
pub use variational::{
    golden_section, minimize_variational, minimize_variational_in, variational_energy, variational_state,
    VariationalResult, DEFAULT_BRACKET, DEFAULT_LENGTH_TOL,
};

use crate::error::{Error, Result};
use crate::hamiltonians::{BasisKind, BasisTag, HamiltonianMatrix, MatrixData};

/// Relative residual tolerance `‖Hv − λv‖ ≤ tol·‖H‖`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Sparse matrices up to this dimension are shift-inverted with a dense factorization.
pub const DENSE_FACTOR_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenRequest {
    All,
    Lowest(usize),
}

/// Eigenpairs sorted by energy. Energies are reported as `E − E_0b`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub basis: BasisTag,
    pub energies: Vec<f64>,
    /// One eigenvector per column.
    pub vectors: Mat<c64>,
    pub residuals: Vec<f64>,
    /// Norm estimate used to scale the residual check.
    pub norm: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, idx: usize) -> Vec<c64> {
        self.vectors.col(idx).iter().copied().collect()
    }

    /// Qubit-pair slice of eigenvector `idx`.
    pub fn pair_coefficients(&self, idx: usize) -> Vec<c64> {
        self.vectors.col(idx).iter().take(self.basis.pair_dim()).copied().collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `max |V†V − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.len();
        let mut gram = Mat::<c64>::zeros(k, k);
        matmul(gram.as_mut(), Accum::Replace, self.vectors.adjoint(), self.vectors.as_ref(), c64::new(1.0, 0.0), faer::get_global_parallelism());
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[(a, b)] - target).norm());
            }
        }
        worst
    }
}

/// Full dense decomposition for dense matrices; iterative lowest-`k` for
/// sparse ones.
pub fn eigensolve(h: &HamiltonianMatrix, request: EigenRequest) -> Result<SpectralDecomposition> {
    match (&h.data, request) {
        (MatrixData::Sparse(_), EigenRequest::Lowest(k)) => shift_invert::lowest_sparse(h, k),
        (MatrixData::Sparse(s), EigenRequest::All) => {
            let dense = HamiltonianMatrix {
                basis: h.basis,
                data: MatrixData::Complex(s.to_dense()),
                energy_offset: h.energy_offset,
                structure: None,
            };
            dense_eigensolve(&dense, None)
        }
        (_, EigenRequest::All) => dense_eigensolve(h, None),
        (_, EigenRequest::Lowest(k)) => dense_eigensolve(h, Some(k)),
    }
}

fn dense_eigensolve(h: &HamiltonianMatrix, keep: Option<usize>) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let (mut values, mut vectors) = match &h.data {
        MatrixData::Real(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Convergence {
                message: format!("dense eigensolver failed: {e:?}"),
                residual: f64::NAN,
            })?;
            let s = evd.S().column_vector();
            let u = evd.U();
            ((0..n).map(|i| s[i]).collect::<Vec<f64>>(), Mat::from_fn(n, n, |a, b| c64::new(u[(a, b)], 0.0)))
        }
        MatrixData::Complex(m) => {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Convergence {
                message: format!("dense eigensolver failed: {e:?}"),
                residual: f64::NAN,
            })?;
            let s = evd.S().column_vector();
            ((0..n).map(|i| s[i].re).collect::<Vec<f64>>(), evd.U().to_owned())
        }
        MatrixData::Sparse(_) => unreachable!("sparse matrices are densified by the caller"),
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let k = keep.unwrap_or(n).min(n);
    order.truncate(k);
    values = order.iter().map(|&i| values[i]).collect();
    vectors = Mat::from_fn(n, k, |a, b| vectors[(a, order[b])]);

    finish(h, values, vectors)
}

/// Canonicalizes phases, computes residuals against `h` and packages the result.
pub(crate) fn finish(h: &HamiltonianMatrix, values: Vec<f64>, mut vectors: Mat<c64>) -> Result<SpectralDecomposition> {
    canonicalize_phases(&mut vectors);
    let n = vectors.nrows();
    let k = vectors.ncols();
    let hv = apply_columns(h, &vectors);
    let residuals: Vec<f64> = (0..k)
        .map(|c| (0..n).map(|a| (hv[(a, c)] - vectors[(a, c)] * values[c]).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let norm = operator_norm_estimate(h, &values);
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= RESIDUAL_TOL * norm) {
        return Err(Error::Convergence {
            message: format!("residual exceeds {RESIDUAL_TOL:e}·‖H‖ (‖H‖ ≈ {norm:e})"),
            residual: worst,
        });
    }
    Ok(SpectralDecomposition {
        basis: h.basis,
        energies: values.iter().map(|v| v + h.energy_offset).collect(),
        vectors,
        residuals,
        norm,
    })
}

/// Max absolute row sum, an upper bound of the spectral norm, floored by the
/// largest eigenvalue magnitude seen.
fn operator_norm_estimate(h: &HamiltonianMatrix, values: &[f64]) -> f64 {
    let row_sum = match &h.data {
        MatrixData::Real(m) => (0..m.nrows()).map(|a| (0..m.ncols()).map(|b| m[(a, b)].abs()).sum::<f64>()).fold(0.0, f64::max),
        MatrixData::Complex(m) => (0..m.nrows()).map(|a| (0..m.ncols()).map(|b| m[(a, b)].norm()).sum::<f64>()).fold(0.0, f64::max),
        MatrixData::Sparse(s) => {
            let mut sums = vec![0.0; s.dim()];
            for r in 0..s.dim() {
                for (c, v) in s.row(r) {
                    sums[r] += v.norm();
                    if c != r {
                        sums[c] += v.norm();
                    }
                }
            }
            sums.into_iter().fold(0.0, f64::max)
        }
    };
    let spectral = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    row_sum.max(spectral).max(f64::MIN_POSITIVE)
}

fn apply_columns(h: &HamiltonianMatrix, vectors: &Mat<c64>) -> Mat<c64> {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    let par = faer::get_global_parallelism();
    match &h.data {
        MatrixData::Real(m) => {
            // real matrix: act on real and imaginary parts separately
            let re = Mat::from_fn(n, k, |a, c| vectors[(a, c)].re);
            let mut out_re = Mat::<f64>::zeros(n, k);
            matmul(out_re.as_mut(), Accum::Replace, m.as_ref(), re.as_ref(), 1.0, par);
            let has_imag = (0..k).any(|c| (0..n).any(|a| vectors[(a, c)].im != 0.0));
            let mut out_im = Mat::<f64>::zeros(n, k);
            if has_imag {
                let im = Mat::from_fn(n, k, |a, c| vectors[(a, c)].im);
                matmul(out_im.as_mut(), Accum::Replace, m.as_ref(), im.as_ref(), 1.0, par);
            }
            Mat::from_fn(n, k, |a, c| c64::new(out_re[(a, c)], out_im[(a, c)]))
        }
        MatrixData::Complex(m) => {
            let mut out = Mat::<c64>::zeros(n, k);
            matmul(out.as_mut(), Accum::Replace, m.as_ref(), vectors.as_ref(), c64::new(1.0, 0.0), par);
            out
        }
        MatrixData::Sparse(s) => {
            use rayon::prelude::*;
            let cols: Vec<Vec<c64>> = (0..k)
                .into_par_iter()
                .map(|c| {
                    let x: Vec<c64> = vectors.col(c).iter().copied().collect();
                    let mut y = vec![c64::new(0.0, 0.0); n];
                    s.apply(&x, &mut y);
                    y
                })
                .collect();
            Mat::from_fn(n, k, |a, c| cols[c][a])
        }
    }
}

/// Rotates each column so that its largest-magnitude entry is real positive.
/// Ties are broken towards the smaller index.
pub fn canonicalize_phases(vectors: &mut Mat<c64>) {
    for c in 0..vectors.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for a in 0..vectors.nrows() {
            let v = vectors[(a, c)].norm();
            if v > best_abs * (1.0 + 1e-12) {
                best = a;
                best_abs = v;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let phase = vectors[(best, c)].conj() / best_abs;
        for a in 0..vectors.nrows() {
            vectors[(a, c)] *= phase;
        }
        vectors[(best, c)] = c64::new(vectors[(best, c)].re, 0.0);
    }
}

pub(crate) fn spin_tag_required(tag: &BasisTag) -> Result<()> {
    if tag.kind != BasisKind::Spin {
        return Err(Error::BasisMismatch { expected: tag.pair_dim(), found: tag.dim() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::BasisKind;

    fn two_level(w: f64) -> HamiltonianMatrix {
        HamiltonianMatrix {
            basis: BasisTag::new(BasisKind::Spin, 2, 3),
            data: MatrixData::Real(Mat::from_fn(1, 1, |_, _| 0.0)),
            energy_offset: 0.0,
            structure: None,
        }
        .with_data(MatrixData::Real(Mat::from_fn(2, 2, |a, b| if a == b { 0.0 } else { w })))
    }

    impl HamiltonianMatrix {
        fn with_data(mut self, data: MatrixData) -> Self {
            self.data = data;
            self
        }
    }

    #[test]
    fn two_by_two() {
        let d = eigensolve(&two_level(0.3), EigenRequest::All).unwrap();
        assert!((d.energies[0] + 0.3).abs() < 1e-15);
        assert!((d.energies[1] - 0.3).abs() < 1e-15);
        assert!(d.orthonormality_error() < 1e-14);
    }

    #[test]
    fn phases_are_canonical() {
        let d = eigensolve(&two_level(-0.7), EigenRequest::All).unwrap();
        for c in 0..2 {
            let v = d.vector(c);
            let big = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let first = v.iter().find(|x| (x.norm() - big).abs() < 1e-12).unwrap();
            assert!(first.re > 0.0 && first.im == 0.0);
        }
    }
}
