//! Compressed sparse row matrices built from triplet streams.
//!
//! Assembly pushes `(row, col, value)` triplets in a fixed order; duplicate
//! entries are summed in insertion order during compression, so assembled
//! matrices are bitwise reproducible.

use crate::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: matrix is {rows}x{cols}, operand has length {got}")]
    DimensionMismatch { rows: usize, cols: usize, got: usize },
    #[error("triplet ({row}, {col}) outside matrix of size {rows}x{cols}")]
    TripletOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

#[derive(Clone, Debug)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self, SparseError> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(SparseError::TripletOutOfRange {
                    row: r,
                    col: c,
                    rows: n_rows,
                    cols: n_cols,
                });
            }
        }
        // Stable sort by (row, col) keeps duplicate summation in insertion
        // order.
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                let tail = values.len() - 1;
                values[tail] = values[tail] + v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) -> Result<(), SparseError> {
        if x.len() != self.n_cols || y.len() != self.n_rows {
            return Err(SparseError::DimensionMismatch {
                rows: self.n_rows,
                cols: self.n_cols,
                got: x.len(),
            });
        }
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                acc = acc + *v * x[*c];
            }
            y[r] = acc;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Relative two-norm residual `||A x - b|| / ||b||` (absolute norm when
    /// `b = 0`).
    pub fn relative_residual(&self, x: &[T], b: &[T]) -> Result<T, SparseError> {
        let mut ax = vec![T::zero(); self.n_rows];
        self.matvec(x, &mut ax)?;
        let mut num = T::zero();
        let mut den = T::zero();
        for r in 0..self.n_rows {
            let d = ax[r] - b[r];
            num = num + d * d;
            den = den + b[r] * b[r];
        }
        let num = num.sqrt();
        let den = den.sqrt();
        Ok(if den > T::zero() { num / den } else { num })
    }

    /// Column-compressed copy (pattern sorted by row within each column).
    pub fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<T>) {
        let mut col_ptr = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        let mut next = col_ptr.clone();
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let slot = next[*c];
                row_idx[slot] = r;
                values[slot] = *v;
                next[*c] += 1;
            }
        }
        (col_ptr, row_idx, values)
    }
}
