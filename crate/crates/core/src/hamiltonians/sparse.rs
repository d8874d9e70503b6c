use std::io::{self, Write};

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;

/// Hermitian matrix in compressed-row form storing the upper triangle
/// (diagonal included). Column indices are `u32` to halve index storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCsr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<c64>,
}

impl HermitianCsr {
    /// `rows[r]` holds `(col, value)` with `col ≥ r`; entries need not be sorted
    /// and duplicates are summed.
    pub fn from_upper_rows(dim: usize, rows: Vec<Vec<(u32, c64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        assert!(dim <= u32::MAX as usize);
        let rows: Vec<Vec<(u32, c64)>> = rows
            .into_par_iter()
            .enumerate()
            .map(|(r, mut row)| {
                debug_assert!(row.iter().all(|(c, _)| *c as usize >= r));
                row.sort_unstable_by_key(|e| e.0);
                let mut merged: Vec<(u32, c64)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged
            })
            .collect();
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (upper-triangle) entries.
    pub fn stored_nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.vals[span].iter().copied())
    }

    /// Nonzero count per row of the full (both triangles) matrix.
    pub fn full_row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.dim];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                if v == c64::new(0.0, 0.0) {
                    continue;
                }
                counts[r] += 1;
                if c != r {
                    counts[c] += 1;
                }
            }
        }
        counts
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).find(|(c, _)| *c == r).map(|(_, v)| v.re).unwrap_or(0.0))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part on the diagonal (zero for a Hermitian matrix).
    pub fn diagonal_imag_max(&self) -> f64 {
        (0..self.dim)
            .flat_map(|r| self.row(r).filter(move |(c, _)| *c == r).map(|(_, v)| v.im.abs()))
            .fold(0.0, f64::max)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[c64], y: &mut [c64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = c64::new(0.0, 0.0));
        for r in 0..self.dim {
            let xr = x[r];
            let mut acc = c64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                let v = self.vals[k];
                acc += v * x[c];
                if c != r {
                    y[c] += v.conj() * xr;
                }
            }
            y[r] += acc;
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
                if c != r {
                    m[(c, r)] += v.conj();
                }
            }
        }
        m
    }

    /// All nonzeros of the full matrix, row-major within the upper triangle
    /// followed by the mirrored entry.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            self.row(r).flat_map(move |(c, v)| {
                let mirror = (c != r).then_some((c, r, v.conj()));
                std::iter::once((r, c, v)).chain(mirror)
            })
        })
    }
}

/// Writes `row col re im` lines (0-based indices, both triangles) after a
/// `# dim nnz` header.
pub fn write_triplets<W: Write>(mut out: W, dim: usize, entries: impl Iterator<Item = (usize, usize, c64)>) -> io::Result<()> {
    let entries: Vec<_> = entries.filter(|e| e.2 != c64::new(0.0, 0.0)).collect();
    writeln!(out, "# {} {}", dim, entries.len())?;
    for (r, c, v) in entries {
        writeln!(out, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_dense() {
        let rows = vec![
            vec![(0, c64::new(1.0, 0.0)), (2, c64::new(0.5, -0.25))],
            vec![(1, c64::new(-2.0, 0.0)), (2, c64::new(0.0, 1.0)), (2, c64::new(0.0, 1.0))],
            vec![(2, c64::new(3.0, 0.0))],
        ];
        let h = HermitianCsr::from_upper_rows(3, rows);
        assert_eq!(h.stored_nnz(), 5);
        let d = h.to_dense();
        assert_eq!(d[(1, 2)], c64::new(0.0, 2.0));
        assert_eq!(d[(2, 1)], c64::new(0.0, -2.0));
        let x = [c64::new(1.0, 1.0), c64::new(-0.5, 2.0), c64::new(0.3, 0.0)];
        let mut y = [c64::new(0.0, 0.0); 3];
        h.apply(&x, &mut y);
        for r in 0..3 {
            let expect: c64 = (0..3).map(|c| d[(r, c)] * x[c]).sum();
            assert!((expect - y[r]).norm() < 1e-15);
        }
        assert_eq!(h.full_row_counts(), vec![2, 2, 3]);
        assert_eq!(h.triplets().count(), 7);
    }
}
