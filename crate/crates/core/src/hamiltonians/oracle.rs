use std::f64::consts::SQRT_2;

use num_complex::Complex64 as c64;

use super::{BasisKind, BasisTag, HamiltonianMatrix, HermitianCsr, MatrixData};
use crate::error::{Error, Result};
use crate::lattice::{PairBasis, QubitPositions};
use crate::params::SystemParams;

pub const DEFAULT_ORACLE_CAP: usize = 20_000;

/// Index of the photon pair `|n, m⟩`, `0 ≤ n ≤ m < N`, inside the photon block.
pub fn photon_pair_index(n_cavities: usize, n: usize, m: usize) -> usize {
    debug_assert!(n <= m && m < n_cavities);
    n * n_cavities - n * (n + 1) / 2 + m
}

/// Literal two-excitation sector of the full model in real space, scattering
/// photon pairs included. Sites are 0-based internally (`cavity label − 1`).
pub fn build_h_complete_oracle(params: &SystemParams, positions: &QubitPositions, cap: usize) -> Result<HamiltonianMatrix> {
    let n = params.n_cavities;
    let n_e = positions.len();
    let tag = BasisTag::new(BasisKind::CompleteOracle, n_e, n);
    let dim = tag.dim();
    if dim > cap {
        return Err(Error::Size { dim, cap });
    }
    let pairs = PairBasis::new(n_e);
    let n_p = pairs.len();
    let qp = |i: usize, site: usize| n_p + (i - 1) * n + site;
    let photon_start = n_p + n_e * n;
    let pp = |a: usize, b: usize| photon_start + photon_pair_index(n, a.min(b), a.max(b));
    let site = |j: usize| positions.site(j) - 1;

    let detuning = params.omega_c - params.omega_e;
    let pair_energy = 2.0 * params.omega_c - 2.0 * params.omega_e;
    let g = params.g;
    let mut rows: Vec<Vec<(u32, c64)>> = vec![Vec::new(); dim];
    // each matrix element is added exactly once, at its upper-triangle slot
    let mut add = |r: usize, c: usize, v: f64| {
        if v != 0.0 {
            rows[r.min(c)].push((r.max(c) as u32, c64::new(v, 0.0)));
        }
    };

    for (i, j) in pairs.pairs() {
        let p = pairs.index(i, j);
        add(p, qp(i, site(j)), g);
        add(p, qp(j, site(i)), g);
    }
    for i in 1..=n_e {
        let ni = site(i);
        for x in 0..n {
            let r = qp(i, x);
            add(r, r, detuning);
            add(r, qp(i, (x + 1) % n), -1.0);
            add(r, pp(ni, x), if ni == x { SQRT_2 * g } else { g });
        }
    }
    for a in 0..n {
        for b in a..n {
            let r = pp(a, b);
            add(r, r, pair_energy + if a == b { params.u } else { 0.0 });
            // move one photon by one site: amplitude −sqrt(n_from)·sqrt(n_to after the move)
            let moves: &[(usize, usize)] = if a == b { &[(a, a)] } else { &[(a, b), (b, a)] };
            for &(from, other) in moves {
                let n_from: f64 = if a == b { 2.0 } else { 1.0 };
                for to in [(from + 1) % n, (from + n - 1) % n] {
                    let n_to: f64 = if to == other { 2.0 } else { 1.0 };
                    let c = pp(to, other);
                    if c > r {
                        add(r, c, -(n_from * n_to).sqrt());
                    }
                }
            }
        }
    }
    Ok(HamiltonianMatrix {
        basis: tag,
        data: MatrixData::Sparse(HermitianCsr::from_upper_rows(dim, rows)),
        energy_offset: params.delta,
        structure: None,
    })
}
