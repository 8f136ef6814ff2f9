//! Restarted GMRES with Jacobi (diagonal) right preconditioning.
//!
//! Right preconditioning keeps the monitored residual equal to the true
//! residual of the original system. Suitable for the indefinite saddle
//! point at desk scale; the direct path remains the production default.

use crate::sparse::CsrMatrix;
use crate::Real;

pub struct GmresOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn gmres<T: Real>(
    matrix: &CsrMatrix<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
    restart: usize,
) -> GmresOutcome<T> {
    let n = matrix.n_rows();
    let norm_b = norm(b);
    let mut x = vec![T::zero(); n];
    if norm_b == T::zero() {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            converged: true,
        };
    }

    // Jacobi scaling, unit where the diagonal vanishes (multiplier row).
    let mut inv_diag = vec![T::one(); n];
    for r in 0..n {
        let d = matrix.get(r, r);
        if d.abs() > T::zero() {
            inv_diag[r] = T::one() / d;
        }
    }

    let restart = restart.max(1);
    let mut total_iters = 0usize;
    let mut scratch = vec![T::zero(); n];

    'outer: while total_iters < max_iter {
        // r = b - A x
        matrix.matvec(&x, &mut scratch).expect("dimension checked");
        let mut r: Vec<T> = b.iter().zip(&scratch).map(|(bi, ai)| *bi - *ai).collect();
        let beta = norm(&r);
        if beta <= tol * norm_b {
            return GmresOutcome {
                solution: x,
                iterations: total_iters,
                converged: true,
            };
        }
        for v in &mut r {
            *v = *v / beta;
        }
        let m = restart.min(max_iter - total_iters);
        let mut basis: Vec<Vec<T>> = vec![r];
        let mut h = vec![vec![T::zero(); m]; m + 1]; // Hessenberg, row-major
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            total_iters += 1;
            // w = A M^{-1} v_k
            let mut z: Vec<T> = basis[k]
                .iter()
                .zip(&inv_diag)
                .map(|(v, d)| *v * *d)
                .collect();
            matrix.matvec(&z, &mut scratch).expect("dimension checked");
            z.copy_from_slice(&scratch);
            // modified Gram-Schmidt
            for (i, vi) in basis.iter().enumerate() {
                let hik = dot(&z, vi);
                h[i][k] = hik;
                for (zj, vj) in z.iter_mut().zip(vi) {
                    *zj = *zj - hik * *vj;
                }
            }
            let hk1 = norm(&z);
            h[k + 1][k] = hk1;
            // apply stored rotations
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + hk1 * hk1).sqrt();
            if denom == T::zero() {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = hk1 / denom;
            h[k][k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;

            if hk1 > T::zero() {
                for v in &mut z {
                    *v = *v / hk1;
                }
                basis.push(z);
            }

            if g[k + 1].abs() <= tol * norm_b || hk1 == T::zero() || total_iters >= max_iter {
                break;
            }
        }

        // solve the small triangular system and update x through M^{-1}
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc = acc - h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] = x[i] + inv_diag[i] * basis[j][i] * *yj;
            }
        }

        matrix.matvec(&x, &mut scratch).expect("dimension checked");
        let res = b
            .iter()
            .zip(&scratch)
            .map(|(bi, ai)| (*bi - *ai) * (*bi - *ai))
            .fold(T::zero(), |a, v| a + v)
            .sqrt();
        if res <= tol * norm_b {
            return GmresOutcome {
                solution: x,
                iterations: total_iters,
                converged: true,
            };
        }
        if k_used == 0 {
            break 'outer;
        }
    }

    GmresOutcome {
        solution: x,
        iterations: total_iters,
        converged: false,
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}
