use std::f64::consts::SQRT_2;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64 as c64;
use rayon::prelude::*;

use super::{BasisKind, BasisTag, HamiltonianMatrix, HermitianCsr, MatrixData};
use crate::system::ArraySystem;

/// Slot layout of the truncated two-excitation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullLayout {
    pub n_pairs: usize,
    pub n_qubits: usize,
    pub n_cavities: usize,
}

impl FullLayout {
    pub fn pairs(&self) -> Range<usize> {
        0..self.n_pairs
    }

    pub fn qubit_photon(&self) -> Range<usize> {
        self.n_pairs..self.n_pairs + self.n_qubits * self.n_cavities
    }

    pub fn bound(&self) -> Range<usize> {
        let start = self.qubit_photon().end;
        start..start + self.n_cavities
    }

    /// Index of qubit `i` (1-based) excited together with photon `k` (grid index).
    pub fn qubit_photon_index(&self, i: usize, k: usize) -> usize {
        self.n_pairs + (i - 1) * self.n_cavities + k
    }

    pub fn bound_index(&self, k: usize) -> usize {
        self.qubit_photon().end + k
    }

    pub fn dim(&self) -> usize {
        self.bound().end
    }
}

pub fn full_layout(sys: &ArraySystem) -> FullLayout {
    FullLayout { n_pairs: sys.pairs.len(), n_qubits: sys.n_qubits(), n_cavities: sys.n_cavities() }
}

/// Truncated model: qubit pairs, one excited qubit with one photon, and
/// bound photon pairs. Scattering photon pairs are left out.
pub fn build_h_full(sys: &Arc<ArraySystem>) -> HamiltonianMatrix {
    let layout = full_layout(sys);
    let n = sys.n_cavities();
    let ks = sys.grid.values();
    let sites = sys.positions.sites();
    let g = sys.params.g;
    let pair_coupling = g / (n as f64).sqrt();
    let bound_coupling = g / n as f64;
    let pairs: Vec<(usize, usize)> = sys.pairs.pairs().collect();

    let rows: Vec<Vec<(u32, c64)>> = (0..layout.dim())
        .into_par_iter()
        .map(|r| {
            let mut row = Vec::new();
            if r < layout.n_pairs {
                if g == 0.0 {
                    return row;
                }
                let (i, j) = pairs[r];
                let (ni, nj) = (sites[i - 1] as f64, sites[j - 1] as f64);
                row.reserve(2 * n);
                // qubit i de-excites into a photon, qubit j remains, and vice versa
                for (k, &kv) in ks.iter().enumerate() {
                    row.push((layout.qubit_photon_index(j, k) as u32, c64::from_polar(pair_coupling, kv * ni)));
                    row.push((layout.qubit_photon_index(i, k) as u32, c64::from_polar(pair_coupling, kv * nj)));
                }
            } else if r < layout.qubit_photon().end {
                let offset = r - layout.n_pairs;
                let (i, k) = (offset / n + 1, offset % n);
                row.push((r as u32, c64::new(sys.bands.single_detunings[k], 0.0)));
                if g == 0.0 {
                    return row;
                }
                let ni = sites[i - 1] as f64;
                row.reserve(n);
                for (kk, &big_k) in ks.iter().enumerate() {
                    let amp = bound_coupling * SQRT_2 * sys.transforms[(kk, k)];
                    row.push((layout.bound_index(kk) as u32, c64::from_polar(amp, ni * (big_k - ks[k]))));
                }
            } else {
                let kk = r - layout.qubit_photon().start - layout.n_qubits * n;
                row.push((r as u32, c64::new(sys.bands.bound_detunings[kk], 0.0)));
            }
            row
        })
        .collect();

    HamiltonianMatrix {
        basis: BasisTag::new(BasisKind::FullTruncated, layout.n_qubits, n),
        data: MatrixData::Sparse(HermitianCsr::from_upper_rows(layout.dim(), rows)),
        energy_offset: sys.params.delta,
        structure: Some(Arc::clone(sys)),
    }
}
