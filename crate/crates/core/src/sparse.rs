//! Compressed sparse row storage.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from per-row entry lists. Duplicate columns are summed and exact
    /// zeros dropped.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = col_idx.len();
            for (c, v) in row {
                assert!(c < ncols, "column {c} out of range");
                if col_idx.len() > start && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            // drop entries that cancelled to zero
            let mut w = start;
            for r in start..col_idx.len() {
                if values[r] != 0.0 {
                    col_idx[w] = col_idx[r];
                    values[w] = values[r];
                    w += 1;
                }
            }
            col_idx.truncate(w);
            values.truncate(w);
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, t: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for &(r, c, v) in t {
            rows[r].push((c, v));
        }
        Self::from_rows(ncols, rows)
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let ncols = a.first().map_or(0, Vec::len);
        Self::from_rows(
            ncols,
            a.iter()
                .map(|r| r.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect())
                .collect(),
        )
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn row_entries(&self, i: usize) -> Vec<(usize, f64)> {
        self.row(i).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            a[i][j] = v;
        }
        a
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.ncols];
        for (i, j, v) in self.triplets() {
            rows[j].push((i, v));
        }
        Self::from_rows(self.nrows, rows)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Entrywise symmetry within an absolute tolerance.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square() && self.triplets().all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol)
    }

    /// Replace row `i`, keeping the storage layout valid.
    pub fn set_row(&mut self, i: usize, mut entries: Vec<(usize, f64)>) {
        entries.sort_by_key(|e| e.0);
        entries.retain(|e| e.1 != 0.0);
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        let delta = entries.len() as isize - (hi - lo) as isize;
        self.col_idx.splice(lo..hi, entries.iter().map(|e| e.0));
        self.values.splice(lo..hi, entries.iter().map(|e| e.1));
        for p in &mut self.row_ptr[i + 1..] {
            *p = (*p as isize + delta) as usize;
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let mut rows = Vec::with_capacity(self.nrows * other.nrows);
        for i in 0..self.nrows {
            for k in 0..other.nrows {
                let mut row = Vec::new();
                for (j, a) in self.row(i) {
                    for (l, b) in other.row(k) {
                        row.push((j * other.ncols + l, a * b));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(self.ncols * other.ncols, rows)
    }

    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(self.shape(), other.shape()));
        }
        let rows = (0..self.nrows)
            .map(|i| self.row(i).chain(other.row(i)).collect())
            .collect();
        Ok(Self::from_rows(self.ncols, rows))
    }

    pub fn validate(&self) -> bool {
        self.row_ptr.len() == self.nrows + 1
            && self.row_ptr[0] == 0
            && *self.row_ptr.last().unwrap() == self.nnz()
            && self.col_idx.len() == self.values.len()
            && self.row_ptr.windows(2).all(|w| w[0] <= w[1])
            && (0..self.nrows).all(|i| {
                let c = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
                c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&j| j < self.ncols)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, -1.0), (1, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), 2.5);
        assert!(m.validate());
    }

    #[test]
    fn kron_of_identities() {
        let k = CsrMatrix::identity(2).kron(&CsrMatrix::identity(3));
        assert_eq!(k, CsrMatrix::identity(6));
    }

    #[test]
    fn set_row_shifts_pointers() {
        let mut m = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        m.set_row(0, vec![(1, 5.0)]);
        assert_eq!(m.to_dense(), vec![vec![0.0, 5.0], vec![3.0, 4.0]]);
        assert!(m.validate());
    }
}
