use faer::Mat;

use super::{spin_tag_required, SpectralDecomposition, DEGENERACY_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedLevel {
    /// 0-based eigenstate index of the unperturbed spectrum.
    pub index: usize,
    pub zeroth: f64,
    /// `⟨φ|Y|φ⟩`, never positive for negative semidefinite `Y`.
    pub first: f64,
    pub total: f64,
    /// Set when a neighbouring unperturbed level is closer than the
    /// degeneracy tolerance; non-degenerate theory does not apply then.
    pub degenerate: bool,
}

/// First-order corrections from the pair hopping to selected levels of the
/// single-hopping spectrum.
pub fn first_order_perturbation(single: &SpectralDecomposition, y: &Mat<f64>, indices: &[usize]) -> Result<Vec<PerturbedLevel>> {
    spin_tag_required(&single.basis)?;
    if y.nrows() != single.dim() {
        return Err(Error::BasisMismatch { expected: single.dim(), found: y.nrows() });
    }
    let e = &single.energies;
    indices
        .iter()
        .map(|&idx| {
            if idx >= single.len() {
                return Err(Error::Index { i: idx, j: idx, n_qubits: single.basis.n_qubits });
            }
            let v = single.vector(idx);
            let mut first = 0.0;
            for a in 0..v.len() {
                let mut row = num_complex::Complex64::new(0.0, 0.0);
                for b in 0..v.len() {
                    row += v[b] * y[(a, b)];
                }
                first += (v[a].conj() * row).re;
            }
            let near = |j: Option<usize>| j.and_then(|j| e.get(j)).is_some_and(|ej| (ej - e[idx]).abs() < DEGENERACY_TOL);
            Ok(PerturbedLevel {
                index: idx,
                zeroth: e[idx],
                first,
                total: e[idx] + first,
                degenerate: near(idx.checked_sub(1)) || near(Some(idx + 1)),
            })
        })
        .collect()
}
