//! Hamiltonians at every level of description, as Hermitian matrices on a
//! tagged basis.
//!
//! All matrices live in the frame rotating at `2ω_e`, so diagonals are
//! detunings. Reported energies are `E − E_0b = λ + δ`, see
//! [`HamiltonianMatrix::energy_offset`].

mod adia;
mod full;
mod oracle;
mod sparse;
mod spin;

use std::io::{self, Write};
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as c64;

pub use adia::build_h_adia;
pub use full::{build_h_full, full_layout, FullLayout};
pub use oracle::{build_h_complete_oracle, photon_pair_index, DEFAULT_ORACLE_CAP};
pub use sparse::{write_triplets, HermitianCsr};
pub use spin::{build_h_pair, build_h_single, build_h_spin, build_h_tilde_single};

use crate::system::ArraySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Qubit pairs only.
    Spin,
    /// Qubit pairs and one bound state per `K`.
    Adia,
    /// Qubit pairs, one qubit with one photon, bound states.
    FullTruncated,
    /// Qubit pairs, one qubit with one photon, every photon pair in real space.
    CompleteOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisTag {
    pub kind: BasisKind,
    pub n_qubits: usize,
    pub n_cavities: usize,
}

impl BasisTag {
    pub fn new(kind: BasisKind, n_qubits: usize, n_cavities: usize) -> Self {
        Self { kind, n_qubits, n_cavities }
    }

    pub fn pair_dim(&self) -> usize {
        self.n_qubits * self.n_qubits.saturating_sub(1) / 2
    }

    pub fn dim(&self) -> usize {
        let (p, ne, n) = (self.pair_dim(), self.n_qubits, self.n_cavities);
        match self.kind {
            BasisKind::Spin => p,
            BasisKind::Adia => p + n,
            BasisKind::FullTruncated => p + ne * n + n,
            BasisKind::CompleteOracle => p + ne * n + n * (n + 1) / 2,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MatrixData {
    Real(Mat<f64>),
    Complex(Mat<c64>),
    Sparse(HermitianCsr),
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub basis: BasisTag,
    pub data: MatrixData,
    /// Added to eigenvalues to report `E − E_0b` (equals `δ`).
    pub energy_offset: f64,
    /// Bath data needed to eliminate the qubit-photon block exactly; present
    /// on matrices from [`build_h_full`].
    pub structure: Option<Arc<ArraySystem>>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        match &self.data {
            MatrixData::Real(m) => m.nrows(),
            MatrixData::Complex(m) => m.nrows(),
            MatrixData::Sparse(s) => s.dim(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        match &self.data {
            MatrixData::Real(m) => dense_max(m.nrows(), m.ncols(), |a, b| m[(a, b)].abs()),
            MatrixData::Complex(m) => dense_max(m.nrows(), m.ncols(), |a, b| m[(a, b)].norm()),
            MatrixData::Sparse(s) => s.max_abs(),
        }
    }

    /// Largest deviation from Hermiticity, `max |H_ab − H_ba*|`.
    pub fn hermiticity_error(&self) -> f64 {
        match &self.data {
            MatrixData::Real(m) => dense_max(m.nrows(), m.ncols(), |a, b| (m[(a, b)] - m[(b, a)]).abs()),
            MatrixData::Complex(m) => dense_max(m.nrows(), m.ncols(), |a, b| (m[(a, b)] - m[(b, a)].conj()).norm()),
            MatrixData::Sparse(s) => s.diagonal_imag_max(),
        }
    }

    /// `y = H x` in the rotating frame.
    pub fn apply(&self, x: &[c64], y: &mut [c64]) {
        match &self.data {
            MatrixData::Real(m) => dense_apply(m.nrows(), |a, b| c64::new(m[(a, b)], 0.0), x, y),
            MatrixData::Complex(m) => dense_apply(m.nrows(), |a, b| m[(a, b)], x, y),
            MatrixData::Sparse(s) => s.apply(x, y),
        }
    }

    pub fn to_dense_complex(&self) -> Mat<c64> {
        match &self.data {
            MatrixData::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |a, b| c64::new(m[(a, b)], 0.0)),
            MatrixData::Complex(m) => m.clone(),
            MatrixData::Sparse(s) => s.to_dense(),
        }
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: f64) {
        match &mut self.data {
            MatrixData::Real(m) => (0..m.nrows()).for_each(|a| m[(a, a)] += shift),
            MatrixData::Complex(m) => (0..m.nrows()).for_each(|a| m[(a, a)] += shift),
            MatrixData::Sparse(s) => {
                let dim = s.dim();
                let rows = (0..dim)
                    .map(|r| {
                        let mut row: Vec<(u32, c64)> = s.row(r).map(|(c, v)| (c as u32, v)).collect();
                        row.push((r as u32, c64::new(shift, 0.0)));
                        row
                    })
                    .collect();
                *s = HermitianCsr::from_upper_rows(dim, rows);
            }
        }
    }

    /// Sparse triplet export, see [`write_triplets`].
    pub fn write_triplets<W: Write>(&self, out: W) -> io::Result<()> {
        match &self.data {
            MatrixData::Sparse(s) => write_triplets(out, s.dim(), s.triplets()),
            _ => {
                let m = self.to_dense_complex();
                let n = m.nrows();
                write_triplets(out, n, (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| (a, b, m[(a, b)])))
            }
        }
    }
}

fn dense_max(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    (0..rows).flat_map(|a| (0..cols).map(move |b| (a, b))).map(|(a, b)| f(a, b)).fold(0.0, f64::max)
}

fn dense_apply(n: usize, get: impl Fn(usize, usize) -> c64 + Sync, x: &[c64], y: &mut [c64]) {
    use rayon::prelude::*;
    y.par_iter_mut().enumerate().for_each(|(a, ya)| {
        *ya = (0..n).map(|b| get(a, b) * x[b]).sum();
    });
}
