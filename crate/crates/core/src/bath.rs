//! Spectral data of the nonlinear cavity lattice: single-photon dispersion,
//! two-photon bound states and the detunings entering the eliminations.
//!
//! Bound states are obtained from the exact relative-motion problem on the
//! periodic ring: for center-of-mass momentum `K = 2πn/N` the relative
//! coordinate `m ∈ [−M, M]`, `M = (N−1)/2`, hops with `−2cos(K/2)` and picks up
//! the twist `(−1)^n` when wrapping around. Folding onto `m ≥ 0` gives a
//! symmetric tridiagonal matrix with a `√2` on the first bond.

use std::f64::consts::SQRT_2;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::MomentumGrid;
use crate::params::SystemParams;

const TAIL_CUTOFF: f64 = 1e-14;

/// `E_k = ω_c − 2cos k`.
pub fn single_photon_energy(params: &SystemParams, k: f64) -> f64 {
    params.omega_c - 2.0 * k.cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonBoundState {
    /// Center-of-mass wave vector.
    pub k_com: f64,
    /// Integer grid label of `k_com`.
    pub label: i64,
    /// Absolute energy `E_Kb` (includes `2ω_c`).
    pub energy: f64,
    /// Relative energy `E_Kb − 2ω_c`.
    pub relative_energy: f64,
    psi: Vec<f64>,
    localized: bool,
}

impl TwoPhotonBoundState {
    /// `ψ(m)` for any integer `m`; zero beyond `m_max`.
    pub fn amplitude(&self, m: i64) -> f64 {
        self.psi.get(m.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// Amplitudes for `m = 0..=m_max`.
    pub fn amplitudes(&self) -> &[f64] {
        &self.psi
    }

    pub fn m_max(&self) -> usize {
        self.psi.len() - 1
    }

    /// False when the tail did not drop below the cutoff before the ring's
    /// antipode (small rings or weak binding).
    pub fn is_localized(&self) -> bool {
        self.localized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi[0] * self.psi[0] + 2.0 * self.psi[1..].iter().map(|v| v * v).sum::<f64>()
    }

    /// `Σ_m m² |ψ(m)|²`.
    pub fn size(&self) -> f64 {
        2.0 * self.psi.iter().enumerate().map(|(m, v)| (m * m) as f64 * v * v).sum::<f64>()
    }

    /// `Σ_m e^{imq} ψ(m)`, real because `ψ` is even.
    pub fn relative_transform(&self, q: f64) -> f64 {
        self.psi[0]
            + 2.0 * self.psi[1..].iter().enumerate().map(|(m, v)| v * ((m + 1) as f64 * q).cos()).sum::<f64>()
    }
}

/// Bound state for the grid point `idx`.
pub fn solve_bound_state(params: &SystemParams, grid: &MomentumGrid, idx: usize) -> Result<TwoPhotonBoundState> {
    solve_ring_bound_state(params.u, params.omega_c, grid.len(), grid.label(idx))
}

/// Bound states for every grid point, in grid order.
pub fn solve_bound_states(params: &SystemParams, grid: &MomentumGrid) -> Result<Vec<TwoPhotonBoundState>> {
    (0..grid.len()).into_par_iter().map(|idx| solve_bound_state(params, grid, idx)).collect()
}

/// Relative-motion bound state on a ring of `n_cavities` sites for the
/// center-of-mass label `label` (`K = 2π·label/N`).
pub fn solve_ring_bound_state(u: f64, omega_c: f64, n_cavities: usize, label: i64) -> Result<TwoPhotonBoundState> {
    let k_com = 2.0 * std::f64::consts::PI * label as f64 / n_cavities as f64;
    let half = (n_cavities - 1) / 2;
    let c = (0.5 * k_com).cos();
    let hop = -2.0 * c;

    let mut diag = vec![0.0; half + 1];
    let mut off = vec![hop; half];
    diag[0] = u;
    if half >= 1 {
        off[0] = hop * SQRT_2;
        let twist = if label.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        diag[half] += hop * twist;
    }

    let lambda = lowest_eigenvalue(&diag, &off);
    let edge = -4.0 * c.abs();
    if !(lambda < edge) {
        return Err(Error::NoBoundState { k: k_com });
    }
    let phi = lowest_eigenvector(&diag, &off, lambda);

    // back to ψ on m ≥ 0, normalized over the full ring m ∈ [−M, M]
    let mut psi: Vec<f64> = phi.iter().enumerate().map(|(m, v)| if m == 0 { *v } else { v / SQRT_2 }).collect();
    let norm = (psi[0] * psi[0] + 2.0 * psi[1..].iter().map(|v| v * v).sum::<f64>()).sqrt();
    let sign = if psi[0] < 0.0 { -1.0 } else { 1.0 };
    psi.iter_mut().for_each(|v| *v *= sign / norm);

    // smallest m_max whose discarded tail norm is below the cutoff
    let mut tail = 0.0;
    let mut m_max = half;
    let mut localized = false;
    for m in (1..=half).rev() {
        tail += 2.0 * psi[m] * psi[m];
        if tail.sqrt() >= TAIL_CUTOFF {
            break;
        }
        m_max = m - 1;
        localized = true;
    }
    psi.truncate(m_max + 1);

    Ok(TwoPhotonBoundState {
        k_com,
        label,
        energy: 2.0 * omega_c + lambda,
        relative_energy: lambda,
        psi,
        localized,
    })
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse iteration with a shift just below the lowest eigenvalue; the
/// shifted matrix is positive definite so the LDLᵀ sweep needs no pivoting.
fn lowest_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = lambda - 1e-10 * (1.0 + lambda.abs());
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n];
    d[0] = diag[0] - shift;
    for i in 1..n {
        l[i] = off[i - 1] / d[i - 1];
        d[i] = diag[i] - shift - l[i] * off[i - 1];
    }
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        for i in 1..n {
            x[i] -= l[i] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= l[i + 1] * x[i + 1];
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Bound-state matrix element `√2 Σ_m e^{im(k−K/2) + in(K−k)} ψ(m)`, summed
/// term by term.
pub fn matrix_element_mb(k: f64, n: i64, state: &TwoPhotonBoundState) -> c64 {
    let big_k = state.k_com;
    let m_max = state.m_max() as i64;
    let mut acc = c64::new(0.0, 0.0);
    for m in -m_max..=m_max {
        let phase = m as f64 * (k - 0.5 * big_k) + n as f64 * (big_k - k);
        acc += c64::from_polar(state.amplitude(m), phase);
    }
    acc * SQRT_2
}

/// `S[K][k] = Σ_m e^{im(k−K/2)} ψ_K(m)` for every pair of grid points.
pub fn relative_transform_table(states: &[TwoPhotonBoundState], grid: &MomentumGrid) -> Mat<f64> {
    let n = grid.len();
    let ks = grid.values();
    let rows: Vec<Vec<f64>> = states
        .par_iter()
        .map(|s| ks.iter().map(|&k| s.relative_transform(k - 0.5 * s.k_com)).collect())
        .collect();
    Mat::from_fn(n, n, |a, b| rows[a][b])
}

/// Band structure and detunings on the momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BathBands {
    pub single_band: (f64, f64),
    /// `E_Kb` per grid point.
    pub bound_energies: Vec<f64>,
    /// Bottom of the two-photon scattering continuum per `K`, `2ω_c − 4|cos(K/2)|`.
    pub scattering_edges: Vec<f64>,
    /// `Δ_k = E_k − ω_e`.
    pub single_detunings: Vec<f64>,
    /// `Δ_Kb = E_Kb − 2ω_e`.
    pub bound_detunings: Vec<f64>,
}

impl BathBands {
    pub fn new(params: &SystemParams, grid: &MomentumGrid, states: &[TwoPhotonBoundState]) -> Self {
        let wc = params.omega_c;
        Self {
            single_band: (wc - 2.0, wc + 2.0),
            bound_energies: states.iter().map(|s| s.energy).collect(),
            scattering_edges: grid.values().iter().map(|k| 2.0 * wc - 4.0 * (0.5 * k).cos().abs()).collect(),
            single_detunings: grid.values().iter().map(|&k| single_photon_energy(params, k) - params.omega_e).collect(),
            bound_detunings: states.iter().map(|s| s.energy - 2.0 * params.omega_e).collect(),
        }
    }

    /// Fails when a single-photon or bound-state detuning is not positive.
    pub fn check_band_gap(&self) -> Result<()> {
        if let Some(d) = self.single_detunings.iter().find(|d| **d <= 0.0) {
            return Err(Error::Domain(format!("single-photon detuning {d} is not positive")));
        }
        if let Some(d) = self.bound_detunings.iter().find(|d| **d <= 0.0) {
            return Err(Error::Domain(format!("bound-state detuning {d} is not positive")));
        }
        Ok(())
    }
}

/// Writes `K,E_Kb_minus_2wc,size` rows.
pub fn write_band_csv<W: Write>(out: W, params: &SystemParams, states: &[TwoPhotonBoundState]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["K", "E_Kb_minus_2wc", "size"])?;
    for s in states {
        w.serialize((s.k_com, s.energy - 2.0 * params.omega_c, s.size()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_edges() {
        let p = SystemParams::default();
        assert_eq!(single_photon_energy(&p, 0.0), p.omega_c - 2.0);
        assert!((single_photon_energy(&p, std::f64::consts::PI) - (p.omega_c + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_momentum_bound_state_matches_closed_form() {
        // finite-ring corrections decay like e^{-N/ξ}; negligible at N = 501
        let s = solve_ring_bound_state(-1.0, 0.0, 501, 0).unwrap();
        assert!((s.relative_energy + 17f64.sqrt()).abs() < 1e-9);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-13);
        assert!(s.is_localized());
        assert!(s.amplitude(s.m_max() as i64).abs() < 1e-12);
        let amps = s.amplitudes();
        assert!(amps.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(s.amplitude(3), s.amplitude(-3));
    }

    #[test]
    fn decoupled_relative_motion_at_band_edge() {
        // K = π is not on an odd grid; emulate with an explicit vanishing hop
        let diag = [-0.7, 0.0, 0.0, 0.0];
        let off = [0.0, 0.0, 0.0];
        let lambda = lowest_eigenvalue(&diag, &off);
        assert!((lambda + 0.7).abs() < 1e-15);
        let v = lowest_eigenvector(&diag, &off, lambda);
        assert!((v[0].abs() - 1.0).abs() < 1e-15);
        assert!(v[1..].iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn matrix_element_phase_covariance() {
        let s = solve_ring_bound_state(-1.0, 0.0, 41, 3).unwrap();
        let k = 2.0 * std::f64::consts::PI * -5.0 / 41.0;
        let a = matrix_element_mb(k, 7, &s);
        let b = matrix_element_mb(k, 10, &s);
        let expected = a * c64::from_polar(1.0, (s.k_com - k) * 3.0);
        assert!((b - expected).norm() < 1e-12);
        assert!((a.norm() - b.norm()).abs() < 1e-12);

        let s0 = solve_ring_bound_state(-1.0, 0.0, 41, 0).unwrap();
        let m0 = matrix_element_mb(0.0, 0, &s0);
        assert!(m0.im.abs() < 1e-15);
        let sum: f64 = (-(s0.m_max() as i64)..=s0.m_max() as i64).map(|m| s0.amplitude(m)).sum();
        assert!((m0.re - SQRT_2 * sum).abs() < 1e-13);
    }

    #[test]
    fn band_csv_has_header_and_rows() {
        let p = SystemParams::new(crate::params::RawParams { n_cavities: 21, n_qubits: 4, ..Default::default() }).unwrap();
        let grid = MomentumGrid::new(21).unwrap();
        let states = solve_bound_states(&p, &grid).unwrap();
        let mut buf = Vec::new();
        write_band_csv(&mut buf, &p, &states).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("K,E_Kb_minus_2wc,size\n"));
        assert_eq!(text.lines().count(), 22);
    }
}
