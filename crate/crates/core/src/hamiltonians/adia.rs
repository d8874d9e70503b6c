use faer::Mat;
use num_complex::Complex64 as c64;

use super::{BasisKind, BasisTag, HamiltonianMatrix, MatrixData};
use crate::bath::BathBands;
use crate::params::SystemParams;

/// Pairs plus bound states after eliminating the single-photon states.
///
/// `⟨K|H|ij⟩ = (g²/√N) F[ij, K]` and its conjugate above the diagonal; the
/// bound block is `Δ_Kb` plus `(g²/N) G` when `g_matrix` is given.
pub fn build_h_adia(params: &SystemParams, h_single: &Mat<f64>, f: &Mat<c64>, g_matrix: Option<&Mat<c64>>, bands: &BathBands) -> HamiltonianMatrix {
    let n_p = h_single.nrows();
    let n_k = bands.bound_detunings.len();
    assert_eq!(f.nrows(), n_p);
    assert_eq!(f.ncols(), n_k);
    let n_qubits = ((1.0 + (1.0 + 8.0 * n_p as f64).sqrt()) / 2.0).round() as usize;

    let coupling = params.g * params.g / (n_k as f64).sqrt();
    let bound = params.g * params.g / n_k as f64;
    let mut h = Mat::<c64>::zeros(n_p + n_k, n_p + n_k);
    for a in 0..n_p {
        for b in 0..n_p {
            h[(a, b)] = c64::new(h_single[(a, b)], 0.0);
        }
        for k in 0..n_k {
            let v = coupling * f[(a, k)];
            h[(n_p + k, a)] = v;
            h[(a, n_p + k)] = v.conj();
        }
    }
    for k in 0..n_k {
        h[(n_p + k, n_p + k)] = c64::new(bands.bound_detunings[k], 0.0);
    }
    if let Some(g) = g_matrix {
        for a in 0..n_k {
            for b in 0..n_k {
                h[(n_p + a, n_p + b)] += bound * g[(a, b)];
            }
        }
    }
    HamiltonianMatrix {
        basis: BasisTag::new(BasisKind::Adia, n_qubits, n_k),
        data: MatrixData::Complex(h),
        energy_offset: params.delta,
        structure: None,
    }
}
