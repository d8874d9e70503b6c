//! Measurement-layer quantities: correlations, initial states, overlap
//! decompositions, droplet classification and loss estimates.

mod correlation;
mod droplet;
mod io;
mod loss;

use num_complex::Complex64 as c64;

pub use correlation::{
    argmax_alpha, pair_correlation, pair_correlation_of, peak_spacing_period, spin_spin_correlation, sup_norm_drift, CorrelationRecord,
};
pub use droplet::{classify_droplet_states, span_overlaps, DropletClassification, DropletCriteria, DropletState};
pub use io::{write_corr_snapshot_csv, write_dynamics_csv, write_overlap_csv, write_pair_corr_csv, write_spectrum_csv};
pub use loss::{loss_estimates, LossEstimates};

use crate::error::{Error, Result};
use crate::hamiltonians::BasisTag;
use crate::lattice::PairBasis;
use crate::solver::SpectralDecomposition;

/// Two-excitation state. The first `pair_dim` entries are the qubit-pair
/// amplitudes `d_ij` in [`PairBasis`] order; photonic amplitudes follow
/// when the basis has them.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    pub basis: BasisTag,
    pub coeffs: Vec<c64>,
    pub time: f64,
}

impl WavepacketState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn pair_coefficients(&self) -> &[c64] {
        &self.coeffs[..self.basis.pair_dim().min(self.coeffs.len())]
    }

    /// `Σ |d_ij|²`.
    pub fn pair_weight(&self) -> f64 {
        self.pair_coefficients().iter().map(|c| c.norm_sqr()).sum()
    }

    /// Weight outside the qubit-pair block, see [`photonic_fraction`].
    pub fn photonic_fraction(&self) -> Result<f64> {
        photonic_fraction(&self.basis, &self.coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// Equal superposition of nearest-neighbour pairs.
    PartiallySymmetric,
    /// Equal superposition of all pairs.
    FullySymmetric,
}

impl std::str::FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PS" => Ok(Self::PartiallySymmetric),
            "FS" => Ok(Self::FullySymmetric),
            _ => Err(Error::Domain(format!("unknown initial state kind {s:?}, expected PS or FS"))),
        }
    }
}

/// PS or FS state at `t = 0`, embedded in `basis` with zero photonic amplitudes.
pub fn initial_state(kind: InitialKind, basis: BasisTag) -> WavepacketState {
    let n = basis.n_qubits;
    let pairs = PairBasis::new(n);
    let mut coeffs = vec![c64::new(0.0, 0.0); basis.dim()];
    match kind {
        InitialKind::PartiallySymmetric => {
            let amp = 1.0 / ((n - 1) as f64).sqrt();
            for p in pairs.block(1) {
                coeffs[p] = c64::new(amp, 0.0);
            }
        }
        InitialKind::FullySymmetric => {
            let amp = (2.0 / (n * (n - 1)) as f64).sqrt();
            coeffs[..pairs.len()].iter_mut().for_each(|c| *c = c64::new(amp, 0.0));
        }
    }
    WavepacketState { basis, coeffs, time: 0.0 }
}

/// `(E − E_0b, |⟨φ_E|ψ0⟩|²)` for every eigenstate, sorted by energy.
pub fn overlap_spectrum(psi0: &WavepacketState, decomp: &SpectralDecomposition) -> Result<Vec<(f64, f64)>> {
    if psi0.basis != decomp.basis || psi0.coeffs.len() != decomp.dim() {
        return Err(Error::BasisMismatch { expected: decomp.dim(), found: psi0.coeffs.len() });
    }
    let mut out: Vec<(f64, f64)> = (0..decomp.len())
        .map(|e| {
            let amp: c64 = decomp.vectors.col(e).iter().zip(&psi0.coeffs).map(|(v, p)| v.conj() * p).sum();
            (decomp.energies[e], amp.norm_sqr())
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Weight of a state outside the qubit-pair block: `Σ|c_ik|² + Σ|c_Kb|²`.
pub fn photonic_fraction(basis: &BasisTag, coeffs: &[c64]) -> Result<f64> {
    if coeffs.len() != basis.dim() {
        return Err(Error::BasisMismatch { expected: basis.dim(), found: coeffs.len() });
    }
    Ok(coeffs[basis.pair_dim()..].iter().map(|c| c.norm_sqr()).sum())
}
