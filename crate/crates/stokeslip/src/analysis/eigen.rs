//! Dense symmetric eigenproblems for the local inverse/trace constant
//! estimates (cyclic Jacobi; local dimensions stay below ~30).

use crate::Real;

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix
/// (row-major `n x n`), ascending. Cyclic Jacobi with convergence on the
/// off-diagonal Frobenius norm.
pub fn sym_eigen<T: Real>(matrix: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let tol = T::epsilon() * T::lit(1e-2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        let scale = (0..n).fold(T::zero(), |m, i| m.max(a[i * n + i].abs()));
        if off.sqrt() <= tol * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (T::lit(2.0) * apq);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[k * n + new] = v[k * n + old];
        }
    }
    (eigenvalues, eigenvectors)
}

/// Largest eigenvalue of the pencil `A x = lambda B x` with `A, B`
/// symmetric positive semidefinite and `null(B)` contained in `null(A)`.
/// The pencil is restricted to the orthogonal complement of `null(B)`
/// before solving.
pub fn generalized_max_eigenvalue<T: Real>(a: &[T], b: &[T], n: usize) -> T {
    let (b_vals, b_vecs) = sym_eigen(b, n);
    let b_max = b_vals[n - 1];
    assert!(b_max > T::zero(), "B must be nonzero");
    let keep_tol = b_max * T::lit(1e-10);
    let kept: Vec<usize> = (0..n).filter(|&i| b_vals[i] > keep_tol).collect();
    let k = kept.len();
    // W = V_kept diag(1/sqrt(lambda)); reduced = W^T A W
    let mut w = vec![T::zero(); n * k];
    for (col, &i) in kept.iter().enumerate() {
        let inv_sqrt = T::one() / b_vals[i].sqrt();
        for r in 0..n {
            w[r * k + col] = b_vecs[r * n + i] * inv_sqrt;
        }
    }
    let mut aw = vec![T::zero(); n * k];
    for r in 0..n {
        for c in 0..k {
            let mut acc = T::zero();
            for m in 0..n {
                acc = acc + a[r * n + m] * w[m * k + c];
            }
            aw[r * k + c] = acc;
        }
    }
    let mut reduced = vec![T::zero(); k * k];
    for r in 0..k {
        for c in 0..k {
            let mut acc = T::zero();
            for m in 0..n {
                acc = acc + w[m * k + r] * aw[m * k + c];
            }
            reduced[r * k + c] = acc;
        }
    }
    let (vals, _) = sym_eigen(&reduced, k);
    vals[k - 1]
}
