use faer::linalg::matmul::matmul;
use faer::{Accum, Mat};

use crate::error::{Error, Result};
use crate::solver::{SpectralDecomposition, VariationalResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropletCriteria {
    /// Minimal squared overlap with the span of the variational states.
    pub threshold: f64,
    /// Largest ground-state `P_pair` drift under a change of `N_e` that still
    /// counts as self-bound.
    pub max_drift: f64,
}

impl Default for DropletCriteria {
    fn default() -> Self {
        Self { threshold: 0.9, max_drift: 0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropletState {
    /// 1-based position in the energy-ordered spectrum.
    pub index: usize,
    pub energy: f64,
    /// Variational mode with the largest individual overlap.
    pub n: usize,
    pub span_overlap: f64,
    pub mode_overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropletClassification {
    pub states: Vec<DropletState>,
    /// `false` when the size-stability gate rejected every candidate.
    pub self_bound: bool,
    pub drift: Option<f64>,
}

impl DropletClassification {
    pub fn indices(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.index).collect()
    }

    pub fn count(&self) -> usize {
        self.states.len()
    }
}

/// Per eigenstate: squared projection onto the variational span and the
/// individual squared overlaps with each mode `n` (rows).
pub fn span_overlaps(decomp: &SpectralDecomposition, variational: &VariationalResult) -> Result<(Vec<f64>, Mat<f64>)> {
    let p = decomp.basis.pair_dim();
    let k = variational.n_max();
    if variational.states.iter().any(|s| s.len() != p) {
        return Err(Error::BasisMismatch { expected: p, found: variational.states.first().map_or(0, |s| s.len()) });
    }
    let raw = Mat::from_fn(p, k, |a, n| variational.states[n][a]);
    let ortho = orthonormalize(&raw);
    let e = decomp.len();
    let par = faer::get_global_parallelism();
    let re = Mat::from_fn(p, e, |a, c| decomp.vectors[(a, c)].re);
    let im = Mat::from_fn(p, e, |a, c| decomp.vectors[(a, c)].im);
    let project = |basis: &Mat<f64>| {
        let mut pr = Mat::<f64>::zeros(basis.ncols(), e);
        let mut pi = Mat::<f64>::zeros(basis.ncols(), e);
        matmul(pr.as_mut(), Accum::Replace, basis.transpose(), re.as_ref(), 1.0, par);
        matmul(pi.as_mut(), Accum::Replace, basis.transpose(), im.as_ref(), 1.0, par);
        Mat::from_fn(basis.ncols(), e, |a, c| pr[(a, c)].powi(2) + pi[(a, c)].powi(2))
    };
    let individual = project(&raw);
    let onto_span = project(&ortho);
    let span = (0..e).map(|c| (0..ortho.ncols()).map(|a| onto_span[(a, c)]).sum()).collect();
    Ok((span, individual))
}

/// Modified Gram-Schmidt with one reorthogonalization pass; columns that
/// become numerically dependent are dropped.
fn orthonormalize(m: &Mat<f64>) -> Mat<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for c in 0..m.ncols() {
        let mut v: Vec<f64> = m.col(c).iter().copied().collect();
        let start = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for q in &cols {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * start {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    Mat::from_fn(m.nrows(), cols.len(), |a, c| cols[c][a])
}

/// Droplet-like eigenstates: squared overlap with the variational span above
/// `criteria.threshold`.
///
/// `drift` is the ground-state `P_pair` sup-norm change under a change of
/// `N_e`; when given and above `criteria.max_drift` the pair is not
/// self-bound and no state is classified. Without it the gate is skipped.
pub fn classify_droplet_states(
    decomp: &SpectralDecomposition,
    variational: &VariationalResult,
    criteria: &DropletCriteria,
    drift: Option<f64>,
) -> Result<DropletClassification> {
    crate::solver::spin_tag_required(&decomp.basis)?;
    let self_bound = drift.is_none_or(|d| d <= criteria.max_drift);
    if !self_bound {
        return Ok(DropletClassification { states: Vec::new(), self_bound, drift });
    }
    let (span, individual) = span_overlaps(decomp, variational)?;
    let states = span
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > criteria.threshold)
        .map(|(c, &s)| {
            let best = (0..individual.nrows()).max_by(|&a, &b| individual[(a, c)].total_cmp(&individual[(b, c)])).unwrap_or(0);
            DropletState { index: c + 1, energy: decomp.energies[c], n: best + 1, span_overlap: s, mode_overlap: individual[(best, c)] }
        })
        .collect();
    Ok(DropletClassification { states, self_bound, drift })
}
