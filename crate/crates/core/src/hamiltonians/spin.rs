use faer::Mat;

use super::{BasisKind, BasisTag, HamiltonianMatrix, MatrixData};
use crate::lattice::PairBasis;
use crate::params::SystemParams;

fn spin_matrix(params: &SystemParams, n_qubits: usize, m: Mat<f64>) -> HamiltonianMatrix {
    HamiltonianMatrix {
        basis: BasisTag::new(BasisKind::Spin, n_qubits, params.n_cavities),
        data: MatrixData::Real(m),
        energy_offset: params.delta,
        structure: None,
    }
}

/// Constrained single-qubit hopping on the pair basis.
///
/// Acting on `|a,b⟩`, one excitation stays as spectator while the other hops
/// to any free qubit: `⟨a,j|H|a,b⟩ = W_jb` for `j ∉ {a,b}`. The diagonal
/// collects the two self-interaction terms `W_aa + W_bb`.
pub fn build_h_single(params: &SystemParams, w: &Mat<f64>) -> HamiltonianMatrix {
    let n = w.nrows();
    let basis = PairBasis::new(n);
    let mut h = Mat::<f64>::zeros(basis.len(), basis.len());
    for (a, b) in basis.pairs() {
        let col = basis.index(a, b);
        h[(col, col)] += w[(a - 1, a - 1)] + w[(b - 1, b - 1)];
        // (spectator, hopper)
        for (s, l) in [(a, b), (b, a)] {
            for j in (1..=n).filter(|&j| j != s && j != l) {
                let (lo, hi) = PairBasis::ordered(s, j);
                h[(basis.index(lo, hi), col)] += w[(j - 1, l - 1)];
            }
        }
    }
    spin_matrix(params, n, h)
}

/// Two-magnon sector of the unconstrained hopping `2 Σ_ij W_ij σ_i⁺σ_j⁻`.
pub fn build_h_tilde_single(params: &SystemParams, w: &Mat<f64>) -> HamiltonianMatrix {
    let n = w.nrows();
    let basis = PairBasis::new(n);
    let mut h = Mat::<f64>::zeros(basis.len(), basis.len());
    for (a, b) in basis.pairs() {
        let col = basis.index(a, b);
        // σ_i⁺σ_j⁻ moves the excitation at j to i, or counts it when i = j
        for (stay, moved) in [(a, b), (b, a)] {
            for i in (1..=n).filter(|&i| i != stay) {
                let (lo, hi) = PairBasis::ordered(stay, i);
                h[(basis.index(lo, hi), col)] += 2.0 * w[(i - 1, moved - 1)];
            }
        }
    }
    spin_matrix(params, n, h)
}

/// Pair hopping: the `Y` matrix itself on the pair basis.
pub fn build_h_pair(params: &SystemParams, y: &Mat<f64>) -> HamiltonianMatrix {
    let p = y.nrows();
    let n = ((1.0 + (1.0 + 8.0 * p as f64).sqrt()) / 2.0).round() as usize;
    spin_matrix(params, n, y.clone())
}

/// `H_single + H_pair`.
pub fn build_h_spin(params: &SystemParams, w: &Mat<f64>, y: &Mat<f64>) -> HamiltonianMatrix {
    let mut h = build_h_single(params, w);
    if let MatrixData::Real(m) = &mut h.data {
        assert_eq!(m.nrows(), y.nrows(), "pair basis mismatch");
        *m += y;
    }
    h
}
