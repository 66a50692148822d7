use alloc::vec;
use alloc::vec::Vec;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Rows as `(column, value)` lists; explicit zeros are dropped and
    /// repeated columns within a row are summed.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> SparseMatrix {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            let mut sorted = row.clone();
            sorted.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in sorted {
                assert!(c < ncols, "column {c} out of range");
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            // Drop entries that are exactly zero after merging.
            let mut w = start;
            for r in start..cols.len() {
                if vals[r] != 0.0 {
                    cols[w] = cols[r];
                    vals[w] = vals[r];
                    w += 1;
                }
            }
            cols.truncate(w);
            vals.truncate(w);
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn empty(ncols: usize) -> SparseMatrix {
        SparseMatrix::from_rows(ncols, &[])
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    pub(crate) fn row_range(&self, i: usize) -> core::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub(crate) fn col_at(&self, k: usize) -> usize {
        self.cols[k]
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        self.mul_into(x, &mut out);
        out
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *o = s;
        }
    }

    /// `Aᵀ y`.
    pub fn mul_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += self.vals[k] * yi;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            count[c + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[k];
                cols[next[c]] = i;
                vals[next[c]] = self.vals[k];
                next[c] += 1;
            }
        }
        SparseMatrix {
            ncols: self.nrows(),
            row_ptr,
            cols,
            vals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_transpose() {
        let a = SparseMatrix::from_rows(3, &[vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, 3.0), (1, 1.0)]]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.mul(&[1.0, 1.0, 1.0]), vec![3.0, 0.0, 4.0]);
        assert_eq!(a.mul_transpose(&[1.0, 5.0, 2.0]), vec![1.0, 8.0, 2.0]);
        let t = a.transpose();
        assert_eq!(t.mul(&[1.0, 5.0, 2.0]), vec![1.0, 8.0, 2.0]);
        assert_eq!(t.transpose(), a);
    }
}
