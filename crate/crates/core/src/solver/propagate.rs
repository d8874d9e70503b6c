use faer::linalg::matmul::matmul;
use faer::{Accum, Mat};
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::observables::WavepacketState;

const CHUNK: usize = 128;

/// Uniform grid `start, start + step, …` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.stop < self.start {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// `|ψ(t)⟩ = Σ_E e^{−iEt} |φ_E⟩⟨φ_E|ψ(0)⟩` at every requested time.
pub fn propagate(decomp: &SpectralDecomposition, psi0: &WavepacketState, times: &[f64]) -> Result<Vec<WavepacketState>> {
    propagate_with(decomp, psi0, times, |state| state)
}

/// Like [`propagate`], mapping each state through `f` as soon as it is
/// available so that only the mapped values are kept.
pub fn propagate_with<T: Send>(
    decomp: &SpectralDecomposition,
    psi0: &WavepacketState,
    times: &[f64],
    f: impl Fn(WavepacketState) -> T + Sync,
) -> Result<Vec<T>> {
    let dim = decomp.dim();
    if psi0.coeffs.len() != dim || psi0.basis != decomp.basis {
        return Err(Error::BasisMismatch { expected: dim, found: psi0.coeffs.len() });
    }
    let n_e = decomp.len();
    let overlaps: Vec<c64> = (0..n_e)
        .into_par_iter()
        .map(|e| decomp.vectors.col(e).iter().zip(&psi0.coeffs).map(|(v, p)| v.conj() * p).sum())
        .collect();
    let captured: f64 = overlaps.iter().map(|c| c.norm_sqr()).sum();
    let total: f64 = psi0.coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (captured - total).abs() > 1e-8 * total.max(1.0) {
        return Err(Error::Domain(format!(
            "initial state has weight {:e} outside the computed eigenvectors",
            total - captured
        )));
    }

    let real_vectors = (0..n_e).all(|c| decomp.vectors.col(c).iter().all(|v| v.im == 0.0));
    let vr = real_vectors.then(|| Mat::from_fn(dim, n_e, |a, c| decomp.vectors[(a, c)].re));
    let par = faer::get_global_parallelism();

    let mut out = Vec::with_capacity(times.len());
    for chunk in times.chunks(CHUNK) {
        let phases = Mat::from_fn(n_e, chunk.len(), |e, t| overlaps[e] * c64::from_polar(1.0, -decomp.energies[e] * chunk[t]));
        let psi = match &vr {
            Some(v) => {
                let (re, im) = (Mat::from_fn(n_e, chunk.len(), |a, b| phases[(a, b)].re), Mat::from_fn(n_e, chunk.len(), |a, b| phases[(a, b)].im));
                let mut out_re = Mat::<f64>::zeros(dim, chunk.len());
                let mut out_im = Mat::<f64>::zeros(dim, chunk.len());
                matmul(out_re.as_mut(), Accum::Replace, v.as_ref(), re.as_ref(), 1.0, par);
                matmul(out_im.as_mut(), Accum::Replace, v.as_ref(), im.as_ref(), 1.0, par);
                Mat::from_fn(dim, chunk.len(), |a, b| c64::new(out_re[(a, b)], out_im[(a, b)]))
            }
            None => {
                let mut m = Mat::<c64>::zeros(dim, chunk.len());
                matmul(m.as_mut(), Accum::Replace, decomp.vectors.as_ref(), phases.as_ref(), c64::new(1.0, 0.0), par);
                m
            }
        };
        let mapped: Vec<T> = (0..chunk.len())
            .into_par_iter()
            .map(|t| {
                f(WavepacketState { basis: decomp.basis, coeffs: psi.col(t).iter().copied().collect(), time: chunk[t] })
            })
            .collect();
        out.extend(mapped);
    }
    Ok(out)
}
