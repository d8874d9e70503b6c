//! Brute-force reference constructions used to check the structured builders.
//!
//! Spin Hamiltonians are rebuilt by applying literal operator strings to
//! bit-string states of the full `2^{N_e}` qubit space and reading off the
//! two-excitation block. The bath reference diagonalizes the two-photon
//! sector of the Bose-Hubbard ring in real space.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::lattice::PairBasis;
use crate::params::SystemParams;

/// Largest qubit count accepted by the operator-string builders.
pub const MAX_STRING_QUBITS: usize = 12;
/// Largest ring accepted by the two-photon reference.
pub const MAX_BATH_CAVITIES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOp {
    Raise(usize),
    Lower(usize),
}

/// Applies `ops` right to left to the bit string `state` (bit `i − 1` is
/// qubit `i`). Hard-core spins, so every nonzero result has amplitude one.
pub fn apply_string(state: u32, ops: &[SpinOp]) -> Option<u32> {
    ops.iter().rev().try_fold(state, |s, op| match *op {
        SpinOp::Raise(i) => {
            let bit = 1 << (i - 1);
            (s & bit == 0).then_some(s | bit)
        }
        SpinOp::Lower(i) => {
            let bit = 1 << (i - 1);
            (s & bit != 0).then_some(s & !bit)
        }
    })
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits < 2 || n_qubits > MAX_STRING_QUBITS {
        return Err(Error::Size { dim: n_qubits, cap: MAX_STRING_QUBITS });
    }
    Ok(())
}

/// Two-excitation block of `Σ coeff · string`, on the pair basis.
fn sector_matrix(n_qubits: usize, terms: impl Iterator<Item = (f64, Vec<SpinOp>)>) -> Mat<f64> {
    let basis = PairBasis::new(n_qubits);
    let kets: Vec<(usize, u32)> = basis.pairs().map(|(i, j)| (basis.index(i, j), (1 << (i - 1)) | (1 << (j - 1)))).collect();
    let slot = |mask: u32| -> usize {
        let i = mask.trailing_zeros() as usize + 1;
        let j = 32 - (mask & !(1 << (i - 1))).leading_zeros() as usize;
        basis.index(i, j)
    };
    let mut h = Mat::<f64>::zeros(basis.len(), basis.len());
    for (coeff, ops) in terms {
        if coeff == 0.0 {
            continue;
        }
        for &(col, mask) in &kets {
            if let Some(out) = apply_string(mask, &ops) {
                debug_assert_eq!(out.count_ones(), 2);
                h[(slot(out), col)] += coeff;
            }
        }
    }
    h
}

/// `½ Σ_{ijl} (W_jl σ⁺_i σ⁺_j σ⁻_i σ⁻_l + W_il σ⁺_i σ⁺_j σ⁻_l σ⁻_j)` over all
/// index triples, coinciding ones included.
pub fn operator_string_h_single(w: &Mat<f64>) -> Result<Mat<f64>> {
    let n = w.nrows();
    check_size(n)?;
    use SpinOp::{Lower, Raise};
    let terms = (1..=n).flat_map(move |i| {
        (1..=n).flat_map(move |j| {
            (1..=n).flat_map(move |l| {
                [
                    (0.5 * w[(j - 1, l - 1)], vec![Raise(i), Raise(j), Lower(i), Lower(l)]),
                    (0.5 * w[(i - 1, l - 1)], vec![Raise(i), Raise(j), Lower(l), Lower(j)]),
                ]
            })
        })
    });
    Ok(sector_matrix(n, terms))
}

/// `2 Σ_ij W_ij σ⁺_i σ⁻_j`.
pub fn operator_string_h_tilde_single(w: &Mat<f64>) -> Result<Mat<f64>> {
    let n = w.nrows();
    check_size(n)?;
    let terms = (1..=n).flat_map(move |i| (1..=n).map(move |j| (2.0 * w[(i - 1, j - 1)], vec![SpinOp::Raise(i), SpinOp::Lower(j)])));
    Ok(sector_matrix(n, terms))
}

/// `Σ_{i<j} Σ_{l<h} Y_{ij,lh} σ⁺_i σ⁺_j σ⁻_l σ⁻_h` with `Y` indexed on the
/// pair basis.
pub fn operator_string_h_pair(n_qubits: usize, y: &Mat<f64>) -> Result<Mat<f64>> {
    check_size(n_qubits)?;
    let basis = PairBasis::new(n_qubits);
    if y.nrows() != basis.len() {
        return Err(Error::BasisMismatch { expected: basis.len(), found: y.nrows() });
    }
    let pairs: Vec<(usize, usize)> = basis.pairs().collect();
    let basis = &basis;
    let terms = pairs.iter().flat_map(|&(i, j)| {
        pairs.iter().map(move |&(l, h)| {
            let v = y[(basis.index(i, j), basis.index(l, h))];
            (v, vec![SpinOp::Raise(i), SpinOp::Raise(j), SpinOp::Lower(l), SpinOp::Lower(h)])
        })
    });
    Ok(sector_matrix(n_qubits, terms))
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    (0..a.nrows()).flat_map(|r| (0..a.ncols()).map(move |c| (r, c))).map(|(r, c)| (a[(r, c)] - b[(r, c)]).abs()).fold(0.0, f64::max)
}

/// Full spectrum of the bath restricted to two photons on a ring of
/// `N` cavities, built from `|n, m⟩` occupation states with `n ≤ m`.
/// Energies are absolute.
pub fn two_photon_sector_spectrum(params: &SystemParams) -> Result<Vec<f64>> {
    let n = params.n_cavities;
    if n > MAX_BATH_CAVITIES {
        return Err(Error::Size { dim: n, cap: MAX_BATH_CAVITIES });
    }
    let states: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let index = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        a * n - a * (a + 1) / 2 + b
    };
    let dim = states.len();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for (col, &(a, b)) in states.iter().enumerate() {
        // ω_c per photon plus U n(n−1)/2 on doubly occupied sites
        h[(col, col)] = 2.0 * params.omega_c + if a == b { params.u } else { 0.0 };
        // −J a†_t a_s on each photon, with bosonic factors
        let occupied: &[usize] = if a == b { &[a] } else { &[a, b] };
        for &s in occupied {
            let n_s = if a == b { 2.0f64 } else { 1.0 };
            let other = if a == b { a } else if s == a { b } else { a };
            for t in [(s + 1) % n, (s + n - 1) % n] {
                let n_t_after = if t == other { 2.0f64 } else { 1.0 };
                h[(index(t, other), col)] += -(n_s * n_t_after).sqrt();
            }
        }
    }
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Convergence {
        message: format!("two-photon reference diagonalization failed: {e:?}"),
        residual: f64::NAN,
    })?;
    let s = evd.S().column_vector();
    let mut values: Vec<f64> = (0..dim).map(|i| s[i]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    #[test]
    fn string_application() {
        use SpinOp::*;
        assert_eq!(apply_string(0b011, &[Raise(3), Lower(1)]), Some(0b110));
        assert_eq!(apply_string(0b011, &[Raise(2), Lower(1)]), None);
        assert_eq!(apply_string(0b011, &[Lower(3)]), None);
    }

    #[test]
    fn two_photon_sector_size_and_trace() {
        let p = SystemParams::new(RawParams { n_cavities: 11, n_qubits: 2, ..Default::default() }).unwrap();
        let e = two_photon_sector_spectrum(&p).unwrap();
        assert_eq!(e.len(), 66);
        // trace = N·U from the doubly occupied states
        assert!((e.iter().sum::<f64>() - 11.0 * p.u).abs() < 1e-10);
    }

    #[test]
    fn h_pair_string_is_y_itself() {
        let n = 5;
        let basis = PairBasis::new(n);
        let y = Mat::from_fn(basis.len(), basis.len(), |a, b| -1.0 / (1.0 + (a as f64 - b as f64).abs()));
        let h = operator_string_h_pair(n, &y).unwrap();
        assert!(max_abs_diff(&h, &y) < 1e-15);
    }
}
