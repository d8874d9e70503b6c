//! Bath-mediated effective interactions between qubits.
//!
//! Eliminating the single-photon states yields the constrained hopping `W`,
//! the pair/bound-state coupling `F` and the bound/bound coupling `G`.
//! Eliminating the bound states in turn yields the pair hopping `Y`.
//!
//! `F` and `G` are evaluated through the factorization
//! `M_b(k, n, K) = √2 e^{in(K−k)} S_K(k)` with the real transform
//! `S_K(k) = Σ_m e^{im(k−K/2)} ψ_K(m)`, which turns the double sums into a
//! single momentum sum per distinct qubit distance.

use std::f64::consts::SQRT_2;
use std::io::Write;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat};
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use crate::bath::BathBands;
use crate::error::{Error, Result};
use crate::lattice::{MomentumGrid, PairBasis, QubitPositions};
use crate::params::SystemParams;
use crate::system::ArraySystem;

/// Onsite value `W(0)` and decay length `L_0` of the hopping profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingProfile {
    pub onsite: f64,
    pub length: f64,
}

impl HoppingProfile {
    pub fn at(&self, distance: usize) -> f64 {
        if self.onsite == 0.0 {
            return 0.0;
        }
        self.onsite * (-(distance as f64) / self.length).exp()
    }
}

pub fn hopping_profile(params: &SystemParams) -> Result<HoppingProfile> {
    let half = 0.5 * params.big_delta;
    if half <= 1.0 {
        return Err(Error::Domain(format!(
            "single-excitation detuning {} lies inside the single-photon band",
            params.big_delta
        )));
    }
    let root = (half * half - 1.0).sqrt();
    Ok(HoppingProfile {
        onsite: -2.0 * (0.5 * params.g).powi(2) / root,
        length: -1.0 / (half - root).ln(),
    })
}

/// Closed-form hopping matrix `W_jl = W(0) e^{−|n_j − n_l|/L_0}`.
pub fn compute_w(params: &SystemParams, positions: &QubitPositions) -> Result<Mat<f64>> {
    let profile = hopping_profile(params)?;
    let n = positions.sites();
    Ok(Mat::from_fn(n.len(), n.len(), |a, b| profile.at(n[a].abs_diff(n[b]))))
}

/// `W_jl = −(g²/N) Σ_k e^{ik(n_j−n_l)}/Δ_k` on the discrete grid with the
/// given detunings. With the bare detunings this converges to
/// [`compute_w`] exponentially fast in `N`.
pub fn lattice_sum_w(params: &SystemParams, positions: &QubitPositions, grid: &MomentumGrid, detunings: &[f64]) -> Result<Mat<f64>> {
    check_positive(detunings, "single-photon")?;
    let n = positions.sites();
    let max_d = distance_span(positions);
    let scale = -params.g * params.g / grid.len() as f64;
    let profile: Vec<f64> = (0..=max_d)
        .map(|d| {
            scale * grid.values().iter().zip(detunings).map(|(k, dk)| (k * d as f64).cos() / dk).sum::<f64>()
        })
        .collect();
    Ok(Mat::from_fn(n.len(), n.len(), |a, b| profile[n[a].abs_diff(n[b])]))
}

fn distance_span(positions: &QubitPositions) -> usize {
    let s = positions.sites();
    match (s.iter().min(), s.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    }
}

fn check_positive(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|v| !(**v > 0.0)) {
        Some(v) => Err(Error::Domain(format!("{what} detuning {v} is not positive"))),
        None => Ok(()),
    }
}

/// Pair/bound-state coupling `F[p, K]` with the bare single-photon detunings.
pub fn compute_f(sys: &ArraySystem) -> Result<Mat<c64>> {
    compute_f_with(sys, &sys.bands.single_detunings)
}

/// `F_K(n_i, n_j) = −(1/N) Σ_k [e^{−ikn_i} M_b(k,n_j,K)* + e^{−ikn_j} M_b(k,n_i,K)*]/Δ_k`
/// for arbitrary positive detunings `Δ_k`.
pub fn compute_f_with(sys: &ArraySystem, detunings: &[f64]) -> Result<Mat<c64>> {
    check_positive(detunings, "single-photon")?;
    let n_k = sys.grid.len();
    let ks = sys.grid.values();
    let sites = sys.positions.sites();
    let max_d = distance_span(&sys.positions);

    // phases[d][k] = e^{ikd}/Δ_k
    let phases: Vec<Vec<c64>> = (0..=max_d)
        .map(|d| ks.iter().zip(detunings).map(|(k, dk)| c64::from_polar(1.0 / dk, k * d as f64)).collect())
        .collect();

    let pairs: Vec<(usize, usize)> = sys.pairs.pairs().collect();
    let scale = -SQRT_2 / n_k as f64;
    let columns: Vec<Vec<c64>> = (0..n_k)
        .into_par_iter()
        .map(|kk| {
            let big_k = ks[kk];
            let row = sys.transforms.row(kk);
            let t: Vec<c64> = phases
                .iter()
                .map(|ph| ph.iter().enumerate().map(|(k, p)| p * row[k]).sum())
                .collect();
            pairs
                .iter()
                .map(|&(i, j)| {
                    let (ni, nj) = (sites[i - 1] as f64, sites[j - 1] as f64);
                    let (lo, hi) = if nj >= ni { (ni, nj) } else { (nj, ni) };
                    let td = t[(hi - lo) as usize];
                    // T(−d) = T(d)*
                    scale * (c64::from_polar(1.0, -big_k * hi) * td + c64::from_polar(1.0, -big_k * lo) * td.conj())
                })
                .collect()
        })
        .collect();
    Ok(Mat::from_fn(pairs.len(), n_k, |p, kk| columns[kk][p]))
}

/// Bound/bound coupling `G[K, K']` with the bare single-photon detunings.
pub fn compute_g_matrix(sys: &ArraySystem) -> Result<Mat<c64>> {
    compute_g_matrix_with(sys, &sys.bands.single_detunings)
}

/// `G_KK' = −(1/N) Σ_j Σ_k M_b(k,n_j,K)* M_b(k,n_j,K')/Δ_k`.
pub fn compute_g_matrix_with(sys: &ArraySystem, detunings: &[f64]) -> Result<Mat<c64>> {
    check_positive(detunings, "single-photon")?;
    let n_k = sys.grid.len();
    let ks = sys.grid.values();
    let sites = sys.positions.sites();

    // weighted Gram matrix Σ_k S_K(k) S_K'(k)/Δ_k
    let weighted = Mat::from_fn(n_k, n_k, |a, k| sys.transforms[(a, k)] / detunings[k]);
    let mut gram = Mat::<f64>::zeros(n_k, n_k);
    matmul(gram.as_mut(), Accum::Replace, weighted.as_ref(), sys.transforms.transpose(), 1.0, faer::get_global_parallelism());

    let scale = -2.0 / n_k as f64;
    Ok(Mat::from_fn(n_k, n_k, |a, b| {
        let q = ks[b] - ks[a];
        let structure: c64 = sites.iter().map(|&n| c64::from_polar(1.0, n as f64 * q)).sum();
        structure * (scale * gram[(a, b)])
    }))
}

/// Pair hopping `Y = −(g⁴/N)·Re(A A†)` with `A[p, K] = F[p, K]/sqrt(Δ_Kb)`.
///
/// `A A†` is real for real bound-state amplitudes; the residual imaginary part
/// is rounding noise and is dropped.
pub fn compute_y(params: &SystemParams, f: &Mat<c64>, bands: &BathBands) -> Result<Mat<f64>> {
    check_positive(&bands.bound_detunings, "bound-state")?;
    let (n_p, n_k) = (f.nrows(), f.ncols());
    if n_k != bands.bound_detunings.len() {
        return Err(Error::BasisMismatch { expected: bands.bound_detunings.len(), found: n_k });
    }
    let inv_sqrt: Vec<f64> = bands.bound_detunings.iter().map(|d| 1.0 / d.sqrt()).collect();
    let re = Mat::from_fn(n_p, n_k, |p, k| f[(p, k)].re * inv_sqrt[k]);
    let im = Mat::from_fn(n_p, n_k, |p, k| f[(p, k)].im * inv_sqrt[k]);
    let scale = -params.g.powi(4) / n_k as f64;
    let par = faer::get_global_parallelism();
    let mut y = Mat::<f64>::zeros(n_p, n_p);
    matmul(y.as_mut(), Accum::Replace, re.as_ref(), re.transpose(), scale, par);
    matmul(y.as_mut(), Accum::Add, im.as_ref(), im.transpose(), scale, par);
    // exact symmetry
    for a in 0..n_p {
        for b in 0..a {
            let v = 0.5 * (y[(a, b)] + y[(b, a)]);
            y[(a, b)] = v;
            y[(b, a)] = v;
        }
    }
    Ok(y)
}

/// All effective couplings for one parameter set.
#[derive(Debug, Clone)]
pub struct EffectiveCouplings {
    pub hopping: HoppingProfile,
    pub w: Mat<f64>,
    pub f: Mat<c64>,
    pub g: Option<Mat<c64>>,
    pub y: Mat<f64>,
    /// Fingerprint of the parameters the couplings were computed for.
    pub provenance: String,
}

impl EffectiveCouplings {
    pub fn compute(sys: &ArraySystem, include_g: bool) -> Result<Self> {
        sys.bands.check_band_gap()?;
        let hopping = hopping_profile(&sys.params)?;
        let w = compute_w(&sys.params, &sys.positions)?;
        let f = compute_f(sys)?;
        let g = if include_g { Some(compute_g_matrix(sys)?) } else { None };
        let y = compute_y(&sys.params, &f, &sys.bands)?;
        Ok(Self { hopping, w, f, g, y, provenance: sys.params.fingerprint() })
    }
}

/// Writes the hopping matrix as `j,l,W` rows (1-based qubit labels).
pub fn write_w_csv<W: Write>(out: W, w: &Mat<f64>) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["j", "l", "W"])?;
    for a in 0..w.nrows() {
        for b in 0..w.ncols() {
            wr.serialize((a + 1, b + 1, w[(a, b)]))?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Writes the pair-hopping matrix restricted to separations `r, r' ≤ r_max`.
///
/// Rows follow the basis order, so `row`/`col` index the leading
/// `(r ≤ r_max) × (r ≤ r_max)` corner of `Y` in its block layout.
pub fn write_y_blocks_csv<W: Write>(out: W, pairs: &PairBasis, y: &Mat<f64>, r_max: usize) -> csv::Result<()> {
    let r_max = r_max.min(pairs.n_qubits().saturating_sub(1));
    let end = if r_max == 0 { 0 } else { pairs.block(r_max).end };
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["row", "col", "i", "j", "l", "h", "Y"])?;
    let labels: Vec<(usize, usize)> = pairs.pairs().take(end).collect();
    for (row, &(i, j)) in labels.iter().enumerate() {
        for (col, &(l, h)) in labels.iter().enumerate() {
            wr.serialize((row, col, i, j, l, h, y[(row, col)]))?;
        }
    }
    wr.flush()?;
    Ok(())
}
