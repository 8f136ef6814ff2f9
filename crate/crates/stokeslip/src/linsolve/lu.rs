//! Sparse LU factorization, left-looking (Gilbert-Peierls) with partial
//! pivoting and a caller-supplied column elimination order.
//!
//! Each column is obtained by a sparse triangular solve against the columns
//! of L computed so far; the reachable pattern comes from a depth-first
//! search over the L graph, so work stays proportional to arithmetic.

use crate::sparse::CsrMatrix;
use crate::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LuError {
    #[error("matrix is singular: no admissible pivot in column {column} (elimination step {step})")]
    Singular { column: usize, step: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

pub struct SparseLu<T> {
    n: usize,
    /// column permutation: `col_order[k]` is eliminated at step k
    col_order: Vec<usize>,
    /// pivot rows: original row index of pivot position k
    pivot_rows: Vec<usize>,
    l_starts: Vec<usize>,
    /// strictly-lower entries as (original row, value / pivot)
    l_entries: Vec<(usize, T)>,
    u_starts: Vec<usize>,
    /// above-diagonal entries as (pivot position, value)
    u_entries: Vec<(usize, T)>,
    u_diag: Vec<T>,
}

impl<T: Real> SparseLu<T> {
    pub fn factor(matrix: &CsrMatrix<T>, col_order: Vec<usize>) -> Result<Self, LuError> {
        Self::factor_with_threshold(matrix, col_order, T::lit(1e-3))
    }

    /// `threshold` controls how strongly the structurally symmetric pivot
    /// is preferred: it is taken whenever its magnitude reaches
    /// `threshold * max_candidate`.
    pub fn factor_with_threshold(
        matrix: &CsrMatrix<T>,
        col_order: Vec<usize>,
        threshold: T,
    ) -> Result<Self, LuError> {
        let n = matrix.n_rows();
        if matrix.n_cols() != n {
            return Err(LuError::NotSquare {
                rows: n,
                cols: matrix.n_cols(),
            });
        }
        assert_eq!(col_order.len(), n, "column order must be a permutation");
        let (col_ptr, row_idx, values) = matrix.to_csc();
        let pivot_floor = matrix.max_abs() * T::epsilon() * T::lit(16.0);

        const UNSET: usize = usize::MAX;
        let mut pinv = vec![UNSET; n]; // original row -> pivot position
        let mut pivot_rows = vec![0usize; n];
        let mut l_starts = Vec::with_capacity(n + 1);
        let mut l_entries: Vec<(usize, T)> = Vec::new();
        let mut u_starts = Vec::with_capacity(n + 1);
        let mut u_entries: Vec<(usize, T)> = Vec::new();
        let mut u_diag = vec![T::zero(); n];
        l_starts.push(0);
        u_starts.push(0);

        // workspaces
        let mut x = vec![T::zero(); n]; // dense accumulator, original rows
        let mut stamp = vec![0u32; n];
        let mut visited = vec![0u32; n];
        let mut pattern: Vec<usize> = Vec::new(); // topological order (reverse)
        let mut dfs_stack: Vec<(usize, usize)> = Vec::new();

        for (step, &j) in col_order.iter().enumerate() {
            let epoch = step as u32 + 1;
            pattern.clear();

            // symbolic: rows reachable from A(:, j) through finished L columns
            for idx in col_ptr[j]..col_ptr[j + 1] {
                let start = row_idx[idx];
                if visited[start] == epoch {
                    continue;
                }
                dfs_stack.push((start, 0));
                visited[start] = epoch;
                while let Some((node, child)) = dfs_stack.pop() {
                    let pos = pinv[node];
                    let children: &[(usize, T)] = if pos == UNSET {
                        &[]
                    } else {
                        &l_entries[l_starts[pos]..l_starts[pos + 1]]
                    };
                    let mut advanced = false;
                    let mut c = child;
                    while c < children.len() {
                        let next = children[c].0;
                        if visited[next] != epoch {
                            visited[next] = epoch;
                            dfs_stack.push((node, c + 1));
                            dfs_stack.push((next, 0));
                            advanced = true;
                            break;
                        }
                        c += 1;
                    }
                    if !advanced {
                        pattern.push(node); // postorder = reverse topological
                    }
                }
            }

            // numeric scatter of A(:, j)
            for node in &pattern {
                x[*node] = T::zero();
                stamp[*node] = epoch;
            }
            for idx in col_ptr[j]..col_ptr[j + 1] {
                x[row_idx[idx]] = values[idx];
            }

            // sparse triangular solve in topological order
            for &node in pattern.iter().rev() {
                let pos = pinv[node];
                if pos == UNSET {
                    continue;
                }
                let xj = x[node];
                if xj != T::zero() {
                    for &(row, lval) in &l_entries[l_starts[pos]..l_starts[pos + 1]] {
                        debug_assert_eq!(stamp[row], epoch);
                        x[row] = x[row] - lval * xj;
                    }
                }
            }

            // threshold partial pivoting over not-yet-pivotal rows, with a
            // preference for the structurally symmetric row: the matrix
            // pattern is symmetric, so keeping the row permutation close to
            // the column order preserves the fill bounds of the ordering
            let mut pivot_row = UNSET;
            let mut pivot_mag = T::zero();
            for &node in &pattern {
                if pinv[node] == UNSET {
                    let mag = x[node].abs();
                    if mag > pivot_mag || (mag == pivot_mag && pivot_row != UNSET && node < pivot_row)
                    {
                        pivot_mag = mag;
                        pivot_row = node;
                    }
                }
            }
            if pivot_row == UNSET || !(pivot_mag > pivot_floor) {
                return Err(LuError::Singular { column: j, step });
            }
            if pinv[j] == UNSET && stamp[j] == epoch {
                let mate_mag = x[j].abs();
                if mate_mag > pivot_floor && mate_mag >= threshold * pivot_mag {
                    pivot_row = j;
                }
            }
            let pivot = x[pivot_row];
            pinv[pivot_row] = step;
            pivot_rows[step] = pivot_row;
            u_diag[step] = pivot;

            // split the worked column into U (pivotal rows) and L (the rest).
            // Sorting keeps factors deterministic regardless of DFS order.
            let mut u_col: Vec<(usize, T)> = Vec::new();
            let mut l_col: Vec<(usize, T)> = Vec::new();
            for &node in &pattern {
                let pos = pinv[node];
                if node == pivot_row {
                    continue;
                }
                if pos != UNSET {
                    u_col.push((pos, x[node]));
                } else if x[node] != T::zero() {
                    l_col.push((node, x[node] / pivot));
                }
            }
            u_col.sort_unstable_by_key(|&(pos, _)| pos);
            l_col.sort_unstable_by_key(|&(row, _)| row);
            u_entries.extend_from_slice(&u_col);
            l_entries.extend_from_slice(&l_col);
            u_starts.push(u_entries.len());
            l_starts.push(l_entries.len());
        }

        Ok(SparseLu {
            n,
            col_order,
            pivot_rows,
            l_starts,
            l_entries,
            u_starts,
            u_entries,
            u_diag,
        })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        // forward substitution with unit-diagonal L, original row indexing
        let mut work = b.to_vec();
        for k in 0..self.n {
            let zk = work[self.pivot_rows[k]];
            if zk != T::zero() {
                for &(row, lval) in &self.l_entries[self.l_starts[k]..self.l_starts[k + 1]] {
                    work[row] = work[row] - lval * zk;
                }
            }
        }
        // gather to pivot-position indexing
        let mut y: Vec<T> = (0..self.n).map(|k| work[self.pivot_rows[k]]).collect();
        // column-oriented backward substitution with U
        for k in (0..self.n).rev() {
            let xk = y[k] / self.u_diag[k];
            y[k] = xk;
            if xk != T::zero() {
                for &(pos, uval) in &self.u_entries[self.u_starts[k]..self.u_starts[k + 1]] {
                    y[pos] = y[pos] - uval * xk;
                }
            }
        }
        // undo the column permutation
        let mut x = vec![T::zero(); self.n];
        for k in 0..self.n {
            x[self.col_order[k]] = y[k];
        }
        x
    }

}
