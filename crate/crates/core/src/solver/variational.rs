use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use super::spin_tag_required;
use crate::error::{Error, Result};
use crate::hamiltonians::{HamiltonianMatrix, MatrixData};
use crate::lattice::PairBasis;

/// Search interval for the relative length, in lattice units.
pub const DEFAULT_BRACKET: (f64, f64) = (1.0, 30.0);
/// Golden-section stopping width, in lattice units.
pub const DEFAULT_LENGTH_TOL: f64 = 1e-3;

const SCAN_POINTS: usize = 59;

#[derive(Debug, Clone)]
pub struct VariationalResult {
    /// Optimal relative length `L_r`.
    pub length: f64,
    /// `E_var(n) − E_0b` for `n = 1 … n_max`.
    pub energies: Vec<f64>,
    /// Normalized coefficients on the pair basis, one per `n`.
    pub states: Vec<Vec<f64>>,
}

impl VariationalResult {
    pub fn n_max(&self) -> usize {
        self.states.len()
    }

    /// Gram matrix `⟨c_n|c_m⟩` of the stored states.
    pub fn gram(&self) -> Mat<f64> {
        let k = self.states.len();
        Mat::from_fn(k, k, |a, b| dot(&self.states[a], &self.states[b]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Product state `Q_n(R) q(r)` with a standing wave in the center of mass
/// `R = (i+j)/2` and a Lorentzian of width `length` in `r = j − i`,
/// normalized on the pair basis.
pub fn variational_state(n_qubits: usize, length: f64, n: usize) -> Result<Vec<f64>> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Domain(format!("relative length must be positive, got {length}")));
    }
    if n == 0 {
        return Err(Error::Domain("mode index n starts at 1".into()));
    }
    let ne = n_qubits as f64;
    let amp_q = (2.0 / ne).sqrt();
    let amp_r = 2.0 * (length.powi(3) / PI).sqrt();
    let basis = PairBasis::new(n_qubits);
    let mut c: Vec<f64> = basis
        .pairs()
        .map(|(i, j)| {
            let (r, com) = PairBasis::relative_com(i, j);
            let big_q = amp_q * (n as f64 * PI * com / ne).sin();
            let rm = r as f64 - 1.0;
            big_q * amp_r / (rm * rm + length * length)
        })
        .collect();
    let norm = dot(&c, &c).sqrt();
    if norm == 0.0 {
        return Err(Error::Domain(format!("mode n = {n} vanishes on every pair")));
    }
    c.iter_mut().for_each(|x| *x /= norm);
    Ok(c)
}

fn real_matrix(h: &HamiltonianMatrix) -> Result<&Mat<f64>> {
    spin_tag_required(&h.basis)?;
    match &h.data {
        MatrixData::Real(m) => Ok(m),
        _ => Err(Error::Domain("variational energies need a real spin Hamiltonian".into())),
    }
}

fn expectation(m: &Mat<f64>, c: &[f64]) -> f64 {
    (0..c.len())
        .into_par_iter()
        .map(|a| {
            let row: f64 = (0..c.len()).map(|b| m[(a, b)] * c[b]).sum();
            c[a] * row
        })
        .sum()
}

/// Rayleigh quotient of `h_spin` in the product state, reported as `E − E_0b`.
pub fn variational_energy(h_spin: &HamiltonianMatrix, length: f64, n: usize) -> Result<f64> {
    let m = real_matrix(h_spin)?;
    let c = variational_state(h_spin.basis.n_qubits, length, n)?;
    Ok(expectation(m, &c) + h_spin.energy_offset)
}

/// Minimizes a unimodal `f` on `[lo, hi]` down to an interval of width `tol`.
/// Returns the midpoint of the final interval.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// [`minimize_variational_in`] with the default bracket and tolerance.
pub fn minimize_variational(h_spin: &HamiltonianMatrix, n_max: usize) -> Result<VariationalResult> {
    minimize_variational_in(h_spin, n_max, DEFAULT_BRACKET, DEFAULT_LENGTH_TOL)
}

/// Optimizes `L_r` on the `n = 1` state and reuses it for every `n ≤ n_max`.
///
/// A coarse scan first locates the global minimum on the bracket; a minimum
/// on either edge is reported as [`Error::Bracket`]. The golden section then
/// runs between the scan neighbours of that minimum, which keeps it on a
/// unimodal stretch.
pub fn minimize_variational_in(h_spin: &HamiltonianMatrix, n_max: usize, bracket: (f64, f64), tol: f64) -> Result<VariationalResult> {
    let m = real_matrix(h_spin)?;
    let n_qubits = h_spin.basis.n_qubits;
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let energy = |l: f64| variational_state(n_qubits, l, 1).map(|c| expectation(m, &c));

    let grid: Vec<f64> = (0..SCAN_POINTS).map(|s| lo + (hi - lo) * s as f64 / (SCAN_POINTS - 1) as f64).collect();
    let values = grid.iter().map(|&l| energy(l)).collect::<Result<Vec<f64>>>()?;
    let best = (0..SCAN_POINTS).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::Bracket { lo, hi, at: grid[best] });
    }

    let length = golden_section(|l| energy(l).unwrap_or(f64::INFINITY), grid[best - 1], grid[best + 1], tol);
    let states = (1..=n_max).map(|n| variational_state(n_qubits, length, n)).collect::<Result<Vec<_>>>()?;
    let energies = states.iter().map(|c| expectation(m, c) + h_spin.energy_offset).collect();
    Ok(VariationalResult { length, energies, states })
}
