//! Qubit placement, the two-excitation pair basis and the momentum grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Cavity labels (1-based) hosting the qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitPositions {
    sites: Vec<usize>,
}

impl QubitPositions {
    /// Regular block of qubits centered on the array. A spacing of zero puts
    /// every qubit on the central cavity.
    pub fn centered(params: &SystemParams) -> Result<Self> {
        Self::centered_raw(params.n_cavities, params.n_qubits, params.spacing)
    }

    pub fn centered_raw(n_cavities: usize, n_qubits: usize, spacing: usize) -> Result<Self> {
        if n_qubits * spacing >= n_cavities {
            return Err(Error::Geometry(format!(
                "{n_qubits} qubits with spacing {spacing} do not fit into {n_cavities} cavities"
            )));
        }
        let first = (n_cavities - n_qubits * spacing) / 2 + 1;
        Ok(Self { sites: (0..n_qubits).map(|j| first + j * spacing).collect() })
    }

    pub fn from_sites(sites: Vec<usize>) -> Self {
        Self { sites }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Cavity label of qubit `j` (1-based).
    pub fn site(&self, j: usize) -> usize {
        self.sites[j - 1]
    }

    pub fn shifted(&self, s: isize) -> Self {
        Self { sites: self.sites.iter().map(|&n| (n as isize + s) as usize).collect() }
    }
}

/// Bijection between ordered qubit pairs `i < j` (1-based) and linear indices.
///
/// Pairs are grouped in blocks of fixed separation `r = j − i`, ascending in
/// `r`, and ascending in `i` inside a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBasis {
    n_qubits: usize,
    offsets: Vec<usize>,
}

impl PairBasis {
    pub fn new(n_qubits: usize) -> Self {
        // offsets[r-1] = first index of block r; last entry is the total size
        let mut offsets = Vec::with_capacity(n_qubits.max(1));
        let mut acc = 0;
        offsets.push(0);
        for r in 1..n_qubits {
            acc += n_qubits - r;
            offsets.push(acc);
        }
        Self { n_qubits, offsets }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || i >= j || j > self.n_qubits {
            return Err(Error::Index { i, j, n_qubits: self.n_qubits });
        }
        Ok(self.index(i, j))
    }

    /// Unchecked variant of [`encode`](Self::encode).
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offsets[j - i - 1] + i - 1
    }

    pub fn decode(&self, p: usize) -> Result<(usize, usize)> {
        if p >= self.len() {
            return Err(Error::Index { i: p, j: p, n_qubits: self.n_qubits });
        }
        let r = self.offsets.partition_point(|&o| o <= p);
        let i = p - self.offsets[r - 1] + 1;
        Ok((i, i + r))
    }

    /// Index range of the block with separation `r`.
    pub fn block(&self, r: usize) -> std::ops::Range<usize> {
        self.offsets[r - 1]..self.offsets[r]
    }

    /// All pairs in basis order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n_qubits).flat_map(move |r| (1..=self.n_qubits - r).map(move |i| (i, i + r)))
    }

    /// Relative coordinate and center of mass of pair `(i, j)`.
    pub fn relative_com(i: usize, j: usize) -> (usize, f64) {
        (j - i, 0.5 * (i + j) as f64)
    }

    /// `(min, max)` ordering used wherever a pair index is built from two labels.
    pub fn ordered(i: usize, j: usize) -> (usize, usize) {
        (i.min(j), i.max(j))
    }
}

/// Periodic momentum grid `k_n = 2πn/N`, `n = −(N−1)/2 … (N−1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    values: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(n_cavities: usize) -> Result<Self> {
        if n_cavities % 2 == 0 || n_cavities == 0 {
            return Err(Error::Geometry(format!(
                "momentum grid needs an odd number of cavities, got {n_cavities}"
            )));
        }
        let half = (n_cavities as i64 - 1) / 2;
        let values = (-half..=half).map(|n| 2.0 * PI * n as f64 / n_cavities as f64).collect();
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Integer label `n` of grid point `idx`.
    pub fn label(&self, idx: usize) -> i64 {
        idx as i64 - (self.len() as i64 - 1) / 2
    }

    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }
}
