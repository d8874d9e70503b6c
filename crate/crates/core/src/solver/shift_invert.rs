//! Shift-and-invert drivers for the lowest eigenpairs of sparse Hamiltonians.
//!
//! A Cholesky factorization of `H − σ` succeeds only if `σ` lies below the
//! spectrum, so every accepted shift is certified to be a lower bound. For the
//! truncated model the qubit-photon block is diagonal and is eliminated
//! exactly: the Schur complement on pairs and bound states equals the
//! single-photon elimination with detunings `Δ_k − σ`, minus `σ`.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Mat, Side};
use num_complex::Complex64 as c64;

use super::lanczos::{thick_restart_lanczos, HermitianOperator, LanczosOptions, Target};
use super::{finish, SpectralDecomposition, DENSE_FACTOR_LIMIT};
use crate::couplings::{compute_f_with, compute_g_matrix_with, lattice_sum_w};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_h_adia, build_h_single, full_layout, FullLayout, HamiltonianMatrix, HermitianCsr, MatrixData};
use crate::system::ArraySystem;

/// `(H − σ)^{-1}` through a dense Cholesky factor.
pub struct DenseShiftInvert {
    llt: Llt<c64>,
    dim: usize,
}

impl DenseShiftInvert {
    /// `None` when `H − σ` is not positive definite.
    pub fn new(h: &Mat<c64>, sigma: f64) -> Option<Self> {
        let mut shifted = h.clone();
        (0..h.nrows()).for_each(|a| shifted[(a, a)] -= sigma);
        let llt = shifted.llt(Side::Lower).ok()?;
        Some(Self { llt, dim: h.nrows() })
    }
}

impl HermitianOperator for DenseShiftInvert {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[c64], y: &mut [c64]) {
        let mut rhs = Mat::from_fn(self.dim, 1, |a, _| x[a]);
        self.llt.solve_in_place(rhs.as_mut());
        y.iter_mut().enumerate().for_each(|(a, v)| *v = rhs[(a, 0)]);
    }
}

/// Schur complement of `H_full − σ` on the pair and bound-state slots.
pub fn schur_complement(sys: &ArraySystem, sigma: f64) -> Result<Mat<c64>> {
    let shifted: Vec<f64> = sys.bands.single_detunings.iter().map(|d| d - sigma).collect();
    let w = lattice_sum_w(&sys.params, &sys.positions, &sys.grid, &shifted)?;
    let single = match build_h_single(&sys.params, &w).data {
        MatrixData::Real(m) => m,
        _ => unreachable!(),
    };
    let f = compute_f_with(sys, &shifted)?;
    let g = compute_g_matrix_with(sys, &shifted)?;
    let mut s = match build_h_adia(&sys.params, &single, &f, Some(&g), &sys.bands).data {
        MatrixData::Complex(m) => m,
        _ => unreachable!(),
    };
    (0..s.nrows()).for_each(|a| s[(a, a)] -= sigma);
    Ok(s)
}

/// `(H_full − σ)^{-1}` by block elimination of the diagonal qubit-photon block.
pub struct SchurShiftInvert<'a> {
    h: &'a HermitianCsr,
    layout: FullLayout,
    q_shifted: Vec<f64>,
    llt: Llt<c64>,
}

impl<'a> SchurShiftInvert<'a> {
    /// `None` when `σ` is not below the spectrum.
    pub fn new(h: &'a HamiltonianMatrix, sys: &ArraySystem, sigma: f64) -> Result<Option<Self>> {
        let MatrixData::Sparse(csr) = &h.data else {
            return Err(Error::BasisMismatch { expected: h.basis.dim(), found: h.dim() });
        };
        let layout = full_layout(sys);
        let diag = csr.diagonal();
        let q_shifted: Vec<f64> = diag[layout.qubit_photon()].iter().map(|d| d - sigma).collect();
        if q_shifted.iter().any(|d| *d <= 0.0) {
            return Ok(None);
        }
        let s = schur_complement(sys, sigma)?;
        Ok(s.llt(Side::Lower).ok().map(|llt| Self { h: csr, layout, q_shifted, llt }))
    }

    fn x_slots(&self) -> impl Iterator<Item = usize> {
        self.layout.pairs().chain(self.layout.bound())
    }
}

impl HermitianOperator for SchurShiftInvert<'_> {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn apply(&self, b: &[c64], out: &mut [c64]) {
        let n = self.h.dim();
        let zero = c64::new(0.0, 0.0);
        let q = self.layout.qubit_photon();
        let mut tmp = vec![zero; n];
        let mut hv = vec![zero; n];

        // y_Q = D⁻¹ b_Q, then r_X = b_X − H_XQ y_Q
        for (slot, d) in q.clone().zip(&self.q_shifted) {
            tmp[slot] = b[slot] / d;
        }
        self.h.apply(&tmp, &mut hv);
        let x_idx: Vec<usize> = self.x_slots().collect();
        let mut rhs = Mat::from_fn(x_idx.len(), 1, |a, _| b[x_idx[a]] - hv[x_idx[a]]);
        self.llt.solve_in_place(rhs.as_mut());

        // x_Q = D⁻¹ (b_Q − H_QX x_X)
        tmp.iter_mut().for_each(|v| *v = zero);
        for (a, &slot) in x_idx.iter().enumerate() {
            tmp[slot] = rhs[(a, 0)];
        }
        self.h.apply(&tmp, &mut hv);
        for (slot, d) in q.zip(&self.q_shifted) {
            out[slot] = (b[slot] - hv[slot]) / d;
        }
        for (a, &slot) in x_idx.iter().enumerate() {
            out[slot] = rhs[(a, 0)];
        }
    }
}

/// Lowest `k` eigenpairs of a sparse Hamiltonian.
pub(crate) fn lowest_sparse(h: &HamiltonianMatrix, k: usize) -> Result<SpectralDecomposition> {
    let MatrixData::Sparse(csr) = &h.data else { unreachable!() };
    let n = csr.dim();
    let k = k.min(n);
    let nev = (k + 5).min(n);

    // a short plain Lanczos run gives an upper bound of the ground energy
    let pilot_opts = LanczosOptions { nev: 1, basis_size: 80.min(n), tol: f64::INFINITY, max_restarts: 0, target: Target::Smallest };
    let pilot = thick_restart_lanczos(h, pilot_opts)?.values[0];

    let dense = (n <= DENSE_FACTOR_LIMIT).then(|| csr.to_dense());
    if dense.is_none() && h.structure.is_none() {
        return plain_lowest(h, k);
    }

    let mut margin = 1e-3 * pilot.abs().max(1.0);
    for _ in 0..20 {
        let sigma = pilot - margin;
        let inverted: Option<Box<dyn HermitianOperator + '_>> = match (&dense, &h.structure) {
            (Some(m), _) => DenseShiftInvert::new(m, sigma).map(|op| Box::new(op) as Box<dyn HermitianOperator>),
            (None, Some(sys)) => SchurShiftInvert::new(h, sys, sigma)?.map(|op| Box::new(op) as Box<dyn HermitianOperator>),
            (None, None) => unreachable!(),
        };
        let Some(op) = inverted else {
            margin *= 4.0;
            continue;
        };
        let opts = LanczosOptions { tol: 1e-13, ..LanczosOptions::new(nev, Target::Largest) };
        let res = thick_restart_lanczos(op.as_ref(), opts)?;
        return rayleigh_finish(h, res.vectors.into_iter().take(k).collect());
    }
    Err(Error::Convergence { message: "no shift below the spectrum was found".into(), residual: f64::NAN })
}

fn plain_lowest(h: &HamiltonianMatrix, k: usize) -> Result<SpectralDecomposition> {
    let opts = LanczosOptions { tol: 1e-13, ..LanczosOptions::new((k + 5).min(h.dim()), Target::Smallest) };
    let res = thick_restart_lanczos(h, opts)?;
    rayleigh_finish(h, res.vectors.into_iter().take(k).collect())
}

/// Rayleigh-Ritz on the converged vectors against the original operator.
fn rayleigh_finish(h: &HamiltonianMatrix, vectors: Vec<Vec<c64>>) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let k = vectors.len();
    let mut hv = vec![c64::new(0.0, 0.0); n];
    let projected = {
        let mut p = Mat::<c64>::zeros(k, k);
        for b in 0..k {
            h.apply(&vectors[b], &mut hv);
            for a in 0..k {
                p[(a, b)] = vectors[a].iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
            }
        }
        Mat::from_fn(k, k, |a, b| 0.5 * (p[(a, b)] + p[(b, a)].conj()))
    };
    let evd = projected.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Convergence {
        message: format!("Rayleigh-Ritz failed: {e:?}"),
        residual: f64::NAN,
    })?;
    let mut order: Vec<usize> = (0..k).collect();
    let vals: Vec<f64> = (0..k).map(|i| evd.S().column_vector()[i].re).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let u = evd.U();
    let mat = Mat::from_fn(n, k, |row, c| (0..k).map(|j| vectors[j][row] * u[(j, order[c])]).sum());
    finish(h, order.iter().map(|&i| vals[i]).collect(), mat)
}
