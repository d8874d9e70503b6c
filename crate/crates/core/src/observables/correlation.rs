use faer::Mat;
use num_complex::Complex64 as c64;

use super::WavepacketState;
use crate::lattice::PairBasis;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    /// `P_pair(α)` at index `α − 1`, `α = 1 … N_e − 1`.
    pub p_pair: Vec<f64>,
    /// `P_corr(i, j)` on an `N_e × N_e` grid (0-based), mirrored and with a
    /// zero diagonal.
    pub p_corr: Option<Mat<f64>>,
}

impl CorrelationRecord {
    /// `P_pair(α)` for 1-based `α`; zero outside the array.
    pub fn at(&self, alpha: usize) -> f64 {
        alpha.checked_sub(1).and_then(|a| self.p_pair.get(a)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.p_pair.iter().sum()
    }
}

/// `P_pair(α) = Σ_i |d_{i,i+α}|²` from pair amplitudes of `n_qubits` qubits.
pub fn pair_correlation_of(n_qubits: usize, pair_coeffs: &[c64]) -> Vec<f64> {
    let basis = PairBasis::new(n_qubits);
    (1..n_qubits).map(|r| basis.block(r).map(|p| pair_coeffs[p].norm_sqr()).sum()).collect()
}

/// Pair correlation of a state on any basis; photonic slots are ignored.
pub fn pair_correlation(state: &WavepacketState) -> CorrelationRecord {
    CorrelationRecord { p_pair: pair_correlation_of(state.basis.n_qubits, state.pair_coefficients()), p_corr: None }
}

/// `|d_ij|²` on the full qubit grid with `P(j,i) = P(i,j)` and `P(i,i) = 0`.
pub fn spin_spin_correlation(state: &WavepacketState) -> Mat<f64> {
    let n = state.basis.n_qubits;
    let basis = PairBasis::new(n);
    let d = state.pair_coefficients();
    let mut grid = Mat::<f64>::zeros(n, n);
    for (p, (i, j)) in basis.pairs().enumerate() {
        let v = d[p].norm_sqr();
        grid[(i - 1, j - 1)] = v;
        grid[(j - 1, i - 1)] = v;
    }
    grid
}

/// 1-based `α` of the largest entry; ties go to the smaller `α`.
pub fn argmax_alpha(p_pair: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in p_pair.iter().enumerate() {
        if v > p_pair[best] {
            best = a;
        }
    }
    best + 1
}

/// `max_α |P_a(α) − P_b(α)|`, treating entries missing from the shorter
/// record as zero.
pub fn sup_norm_drift(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Mean spacing between successive maxima of a sampled signal.
///
/// Maxima are interior samples not below either neighbour whose topographic
/// prominence reaches `min_prominence · (max − min)` of the signal, so small
/// ripples riding on the main oscillation do not count. `None` with fewer
/// than two maxima.
pub fn peak_spacing_period(times: &[f64], values: &[f64], min_prominence: f64) -> Option<f64> {
    let n = values.len().min(times.len());
    if n < 3 {
        return None;
    }
    let (lo, hi) = values[..n].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let cut = min_prominence * (hi - lo);
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] && prominence(&values[..n], i) >= cut {
                peaks.push(times[(i + j) / 2]);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    (peaks.len() >= 2).then(|| (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

fn prominence(v: &[f64], peak: usize) -> f64 {
    let h = v[peak];
    let mut left_min = h;
    for &x in v[..peak].iter().rev() {
        if x > h {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = h;
    for &x in &v[peak + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}
