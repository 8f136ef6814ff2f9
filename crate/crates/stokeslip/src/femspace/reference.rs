//! Reference-element Lagrange bases and affine cell geometry.
//!
//! Reference simplices: triangle (0,0)-(1,0)-(0,1) and tetrahedron
//! (0,0,0)-(1,0,0)-(0,1,0)-(0,0,1). Barycentric coordinates are
//! `lambda_0 = 1 - sum(x)`, `lambda_i = x_{i-1}`. Local nodes are the
//! vertices (degree 1) plus edge midpoints (degree 2), edges ordered
//! lexicographically by local vertex pair.

use crate::Real;

pub const EDGES_2D: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
pub const EDGES_3D: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn simplex_edges(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        2 => &EDGES_2D,
        3 => &EDGES_3D,
        _ => unreachable!("dimension checked at mesh construction"),
    }
}

pub fn n_local_nodes(dim: usize, degree: usize) -> usize {
    match degree {
        1 => dim + 1,
        2 => dim + 1 + simplex_edges(dim).len(),
        _ => unreachable!("degree checked at space construction"),
    }
}

/// Reference coordinates of the local Lagrange nodes, flat `n * dim`.
pub fn local_node_coords<T: Real>(dim: usize, degree: usize) -> Vec<T> {
    let half = T::lit(0.5);
    let mut verts = vec![T::zero(); (dim + 1) * dim];
    for v in 1..=dim {
        verts[v * dim + (v - 1)] = T::one();
    }
    let mut coords = verts.clone();
    if degree == 2 {
        for &(a, b) in simplex_edges(dim) {
            for d in 0..dim {
                coords.push((verts[a * dim + d] + verts[b * dim + d]) * half);
            }
        }
    }
    coords
}

/// Values, reference gradients and reference Hessians of all local basis
/// functions at a reference point. Hessians are identically zero for
/// degree 1 (stored explicitly so stabilization kernels stay generic).
pub struct RefBasis<T> {
    pub n: usize,
    pub dim: usize,
    pub values: Vec<T>,
    /// `n * dim`
    pub gradients: Vec<T>,
    /// `n * dim * dim`, row-major symmetric
    pub hessians: Vec<T>,
}

pub fn eval_ref_basis<T: Real>(dim: usize, degree: usize, point: &[T]) -> RefBasis<T> {
    let n = n_local_nodes(dim, degree);
    let nv = dim + 1;
    // barycentric values and (constant) gradients
    let mut lambda = vec![T::zero(); nv];
    let mut grad_l = vec![T::zero(); nv * dim];
    lambda[0] = T::one();
    for d in 0..dim {
        lambda[0] = lambda[0] - point[d];
        grad_l[d] = -T::one();
    }
    for v in 1..nv {
        lambda[v] = point[v - 1];
        grad_l[v * dim + (v - 1)] = T::one();
    }

    let mut basis = RefBasis {
        n,
        dim,
        values: vec![T::zero(); n],
        gradients: vec![T::zero(); n * dim],
        hessians: vec![T::zero(); n * dim * dim],
    };

    match degree {
        1 => {
            basis.values.copy_from_slice(&lambda);
            basis.gradients.copy_from_slice(&grad_l);
        }
        2 => {
            let four = T::lit(4.0);
            for v in 0..nv {
                basis.values[v] = lambda[v] * (T::lit(2.0) * lambda[v] - T::one());
                for d in 0..dim {
                    basis.gradients[v * dim + d] =
                        (four * lambda[v] - T::one()) * grad_l[v * dim + d];
                }
                for a in 0..dim {
                    for b in 0..dim {
                        basis.hessians[(v * dim + a) * dim + b] =
                            four * grad_l[v * dim + a] * grad_l[v * dim + b];
                    }
                }
            }
            for (e, &(i, j)) in simplex_edges(dim).iter().enumerate() {
                let k = nv + e;
                basis.values[k] = four * lambda[i] * lambda[j];
                for d in 0..dim {
                    basis.gradients[k * dim + d] =
                        four * (lambda[j] * grad_l[i * dim + d] + lambda[i] * grad_l[j * dim + d]);
                }
                for a in 0..dim {
                    for b in 0..dim {
                        basis.hessians[(k * dim + a) * dim + b] = four
                            * (grad_l[i * dim + a] * grad_l[j * dim + b]
                                + grad_l[j * dim + a] * grad_l[i * dim + b]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    basis
}

/// Affine map of one cell: `x = v0 + J xi`.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry<T> {
    pub dim: usize,
    pub v0: [T; 3],
    pub jac: [[T; 3]; 3],
    pub inv_jac: [[T; 3]; 3],
    pub det: T,
}

impl<T: Real> CellGeometry<T> {
    pub fn new(dim: usize, vertices: &[&[T]]) -> Self {
        let mut v0 = [T::zero(); 3];
        v0[..dim].copy_from_slice(&vertices[0][..dim]);
        let mut jac = [[T::zero(); 3]; 3];
        for j in 0..dim {
            for i in 0..dim {
                jac[i][j] = vertices[j + 1][i] - vertices[0][i];
            }
        }
        let (inv_jac, det) = invert(dim, &jac);
        CellGeometry {
            dim,
            v0,
            jac,
            inv_jac,
            det,
        }
    }

    pub fn volume(&self) -> T {
        let factor = match self.dim {
            2 => T::lit(2.0),
            _ => T::lit(6.0),
        };
        self.det.abs() / factor
    }

    pub fn ref_to_phys(&self, xi: &[T], x: &mut [T]) {
        for i in 0..self.dim {
            let mut acc = self.v0[i];
            for j in 0..self.dim {
                acc = acc + self.jac[i][j] * xi[j];
            }
            x[i] = acc;
        }
    }

    pub fn phys_to_ref(&self, x: &[T], xi: &mut [T]) {
        for i in 0..self.dim {
            let mut acc = T::zero();
            for j in 0..self.dim {
                acc = acc + self.inv_jac[i][j] * (x[j] - self.v0[j]);
            }
            xi[i] = acc;
        }
    }

    /// Pushes reference gradients to physical coordinates (`g -> J^{-T} g`),
    /// leaving any Hessian storage untouched.
    pub fn push_forward_gradients_only(&self, basis: &mut RefBasis<T>) {
        let dim = self.dim;
        let mut tmp = [T::zero(); 3];
        for k in 0..basis.n {
            let g = &mut basis.gradients[k * dim..(k + 1) * dim];
            for i in 0..dim {
                let mut acc = T::zero();
                for j in 0..dim {
                    acc = acc + self.inv_jac[j][i] * g[j];
                }
                tmp[i] = acc;
            }
            g.copy_from_slice(&tmp[..dim]);
        }
    }

    /// Pushes reference gradients/Hessians to physical coordinates:
    /// `g -> J^{-T} g`, `H -> J^{-T} H J^{-1}`.
    pub fn push_forward(&self, basis: &mut RefBasis<T>) {
        let dim = self.dim;
        self.push_forward_gradients_only(basis);
        for k in 0..basis.n {
            let h = &mut basis.hessians[k * dim * dim..(k + 1) * dim * dim];
            let mut hp = [[T::zero(); 3]; 3];
            for a in 0..dim {
                for b in 0..dim {
                    let mut acc = T::zero();
                    for i in 0..dim {
                        for j in 0..dim {
                            acc = acc + self.inv_jac[i][a] * h[i * dim + j] * self.inv_jac[j][b];
                        }
                    }
                    hp[a][b] = acc;
                }
            }
            for a in 0..dim {
                for b in 0..dim {
                    h[a * dim + b] = hp[a][b];
                }
            }
        }
    }
}

fn invert<T: Real>(dim: usize, m: &[[T; 3]; 3]) -> ([[T; 3]; 3], T) {
    let mut inv = [[T::zero(); 3]; 3];
    let det;
    match dim {
        2 => {
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            inv[0][0] = m[1][1] / det;
            inv[0][1] = -m[0][1] / det;
            inv[1][0] = -m[1][0] / det;
            inv[1][1] = m[0][0] / det;
        }
        3 => {
            let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
            let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
            let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
            det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
            inv[0][0] = c00 / det;
            inv[1][0] = c01 / det;
            inv[2][0] = c02 / det;
            inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
            inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
            inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
            inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
            inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
            inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        }
        _ => unreachable!(),
    }
    (inv, det)
}
