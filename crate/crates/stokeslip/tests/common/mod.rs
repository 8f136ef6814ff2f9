//! Shared brute-force oracle used by the oracle test target and the
//! acceptance suite (criterion: local assembly blocks).

#![allow(dead_code)]

use std::sync::Arc;
use stokeslip::assembly::{assemble, CaseDefinition, ProblemConfig, ScalarFn, Theta, VectorFn};
use stokeslip::femspace::Spaces;
use stokeslip::mesh::{BoundaryTag, SimplicialMesh};
use stokeslip::rng::SplitMix64;

// ---------------------------------------------------------------- gauss --

/// Legendre polynomial value by the three-term recurrence.
pub fn legendre_value(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Gauss-Legendre nodes on [-1, 1] by bisection between sign changes
/// sampled on a fine grid, plus the classical weight formula.
pub fn gauss_bisect(n: usize) -> (Vec<f64>, Vec<f64>) {
    let samples = 50 * n;
    let mut brackets = Vec::new();
    let mut prev_x = -1.0;
    let mut prev_f = legendre_value(n, prev_x);
    for k in 1..=samples {
        let x = -1.0 + 2.0 * k as f64 / samples as f64;
        let f = legendre_value(n, x);
        if prev_f == 0.0 {
            brackets.push((prev_x, prev_x));
        } else if prev_f * f < 0.0 {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_f = f;
    }
    assert_eq!(brackets.len(), n, "expected {n} Legendre roots");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (mut lo, mut hi) in brackets {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if legendre_value(n, lo) * legendre_value(n, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        // P'_n(x) = n (P_{n-1}(x) - x P_n(x)) / (1 - x^2)
        let d = n as f64 * (legendre_value(n - 1, x) - x * legendre_value(n, x)) / (1.0 - x * x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * d * d));
    }
    (nodes, weights)
}

/// Quadrature over an arbitrary simplex in physical coordinates, exact to
/// degree 10: collapsed tensor Gauss on the unit box mapped through the
/// simplex parameterization.
pub fn simplex_quadrature(verts: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dim = verts[0].len();
    let npts = 7; // GL(7) handles degree 10 plus the collapse Jacobian
    let (gn, gw) = gauss_bisect(npts);
    let unit: Vec<(f64, f64)> = gn
        .iter()
        .zip(&gw)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            for &(u, wu) in &unit {
                points.push(vec![verts[0][0] + (verts[1][0] - verts[0][0]) * u]);
                weights.push(wu * (verts[1][0] - verts[0][0]).abs());
            }
        }
        2 => {
            let measure = {
                let ax = verts[1][0] - verts[0][0];
                let ay = verts[1][1] - verts[0][1];
                let bx = verts[2][0] - verts[0][0];
                let by = verts[2][1] - verts[0][1];
                (ax * by - ay * bx).abs()
            };
            for &(v, wv) in &unit {
                for &(u, wu) in &unit {
                    let r = u * (1.0 - v);
                    let s = v;
                    let x: Vec<f64> = (0..2)
                        .map(|d| {
                            verts[0][d]
                                + (verts[1][d] - verts[0][d]) * r
                                + (verts[2][d] - verts[0][d]) * s
                        })
                        .collect();
                    points.push(x);
                    weights.push(wu * wv * (1.0 - v) * measure);
                }
            }
        }
        3 => {
            let m = |i: usize, d: usize| verts[i][d] - verts[0][d];
            let det = m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1))
                - m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))
                + m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0));
            let measure = det.abs();
            for &(w, ww) in &unit {
                for &(v, wv) in &unit {
                    for &(u, wu) in &unit {
                        let r = u * (1.0 - v) * (1.0 - w);
                        let s = v * (1.0 - w);
                        let t = w;
                        let x: Vec<f64> = (0..3)
                            .map(|d| {
                                verts[0][d] + m(1, d) * r + m(2, d) * s + m(3, d) * t
                            })
                            .collect();
                        points.push(x);
                        weights.push(wu * wv * ww * (1.0 - v) * (1.0 - w) * (1.0 - w) * measure);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    (points, weights)
}

// ---------------------------------------------------------------- basis --

pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        if dim == 2 {
            for a in (0..=total).rev() {
                out.push([a, total - a, 0]);
            }
        } else {
            for a in (0..=total).rev() {
                for b in (0..=(total - a)).rev() {
                    out.push([a, total - a - b, b]);
                }
            }
        }
    }
    out
}

/// Scalar Lagrange basis on a physical simplex via a monomial Vandermonde
/// solve. Node order matches the library: vertices, then edge midpoints in
/// lexicographic local-edge order.
pub struct OracleBasis {
    dim: usize,
    monomials: Vec<[usize; 3]>,
    /// `coeffs[k]` are the monomial coefficients of basis function k
    coeffs: Vec<Vec<f64>>,
    nodes: Vec<Vec<f64>>,
}

pub fn simplex_edges(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &[(0, 1), (0, 2), (1, 2)]
    } else {
        &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    }
}

impl OracleBasis {
    pub fn new(verts: &[Vec<f64>], degree: usize) -> Self {
        let dim = verts[0].len();
        let mut nodes: Vec<Vec<f64>> = verts.to_vec();
        if degree == 2 {
            for &(a, b) in simplex_edges(dim) {
                nodes.push(
                    (0..dim)
                        .map(|d| 0.5 * (verts[a][d] + verts[b][d]))
                        .collect(),
                );
            }
        }
        let monomials = monomial_exponents(dim, degree);
        let n = nodes.len();
        assert_eq!(monomials.len(), n);
        // Vandermonde V[i][m] = monomial_m(node_i)
        let mut v = vec![0.0; n * n];
        for (i, node) in nodes.iter().enumerate() {
            for (m, exps) in monomials.iter().enumerate() {
                v[i * n + m] = eval_monomial(exps, node, dim);
            }
        }
        // coefficients: solve V c_k = e_k
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let mut rhs = vec![0.0; n];
            rhs[k] = 1.0;
            coeffs.push(dense_solve(&v, &rhs, n));
        }
        OracleBasis {
            dim,
            monomials,
            coeffs,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self, k: usize, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .zip(&self.coeffs[k])
            .map(|(e, c)| c * eval_monomial(e, x, self.dim))
            .sum()
    }

    pub fn gradient(&self, k: usize, x: &[f64]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for d in 0..self.dim {
            for (e, c) in self.monomials.iter().zip(&self.coeffs[k]) {
                if e[d] > 0 {
                    let mut de = *e;
                    de[d] -= 1;
                    g[d] += c * e[d] as f64 * eval_monomial(&de, x, self.dim);
                }
            }
        }
        g
    }

    pub fn hessian(&self, k: usize, x: &[f64]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for a in 0..self.dim {
            for b in 0..self.dim {
                for (e, c) in self.monomials.iter().zip(&self.coeffs[k]) {
                    let mut de = *e;
                    let mut factor = *c;
                    if de[a] == 0 {
                        continue;
                    }
                    factor *= de[a] as f64;
                    de[a] -= 1;
                    if de[b] == 0 {
                        continue;
                    }
                    factor *= de[b] as f64;
                    de[b] -= 1;
                    h[a][b] += factor * eval_monomial(&de, x, self.dim);
                }
            }
        }
        h
    }
}

pub fn eval_monomial(e: &[usize; 3], x: &[f64], dim: usize) -> f64 {
    let mut v = 1.0;
    for d in 0..dim {
        v *= x[d].powi(e[d] as i32);
    }
    v
}

/// Dense Gaussian elimination with partial pivoting (row-major `n x n`).
pub fn dense_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut rows: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                m[rows[i] * n + k]
                    .abs()
                    .partial_cmp(&m[rows[j] * n + k].abs())
                    .unwrap()
            })
            .unwrap();
        rows.swap(k, pivot);
        let rk = rows[k];
        for i in (k + 1)..n {
            let ri = rows[i];
            let f = m[ri * n + k] / m[rk * n + k];
            if f != 0.0 {
                for c in k..n {
                    m[ri * n + c] -= f * m[rk * n + c];
                }
                x[ri] -= f * x[rk];
            }
        }
    }
    let mut out = vec![0.0; n];
    for k in (0..n).rev() {
        let rk = rows[k];
        let mut acc = x[rk];
        for c in (k + 1)..n {
            acc -= m[rk * n + c] * out[c];
        }
        out[k] = acc / m[rk * n + k];
    }
    out
}

// ------------------------------------------------------------- geometry --

pub fn longest_edge(verts: &[Vec<f64>]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            let d2: f64 = verts[i]
                .iter()
                .zip(&verts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            h = h.max(d2.sqrt());
        }
    }
    h
}

/// Outward frame of a facet of a simplex, following the documented tangent
/// conventions.
pub fn facet_frame(cell: &[Vec<f64>], facet: &[Vec<f64>]) -> ([f64; 3], Vec<[f64; 3]>) {
    let dim = cell[0].len();
    let mut normal = [0.0; 3];
    if dim == 2 {
        let t = [facet[1][0] - facet[0][0], facet[1][1] - facet[0][1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        normal[0] = t[1] / len;
        normal[1] = -t[0] / len;
    } else {
        let u = [
            facet[1][0] - facet[0][0],
            facet[1][1] - facet[0][1],
            facet[1][2] - facet[0][2],
        ];
        let v = [
            facet[2][0] - facet[0][0],
            facet[2][1] - facet[0][1],
            facet[2][2] - facet[0][2],
        ];
        let c = cross(u, v);
        let len = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        for d in 0..3 {
            normal[d] = c[d] / len;
        }
    }
    // orient outward
    let centroid_cell: Vec<f64> = (0..dim)
        .map(|d| cell.iter().map(|v| v[d]).sum::<f64>() / cell.len() as f64)
        .collect();
    let centroid_facet: Vec<f64> = (0..dim)
        .map(|d| facet.iter().map(|v| v[d]).sum::<f64>() / facet.len() as f64)
        .collect();
    let dot: f64 = (0..dim)
        .map(|d| normal[d] * (centroid_facet[d] - centroid_cell[d]))
        .sum();
    if dot < 0.0 {
        for n in normal.iter_mut() {
            *n = -*n;
        }
    }
    let mut tangents = Vec::new();
    if dim == 2 {
        tangents.push([-normal[1], normal[0], 0.0]);
    } else {
        let axis = (0..3)
            .min_by(|&a, &b| normal[a].abs().partial_cmp(&normal[b].abs()).unwrap())
            .unwrap();
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let t1 = cross(normal, e);
        let len = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
        let t1 = [t1[0] / len, t1[1] / len, t1[2] / len];
        tangents.push(t1);
        tangents.push(cross(normal, t1));
    }
    (normal, tangents)
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

// --------------------------------------------------------------- oracle --

pub struct OracleProblem {
    pub nu: f64,
    pub theta: f64,
    pub gamma0: f64,
    pub beta: f64,
}

/// Full dense system (matrix and rhs) for a single-cell mesh, integrating
/// the stabilized Nitsche form term by term in physical coordinates.
#[allow(clippy::too_many_arguments)]
pub fn oracle_system(
    verts: &[Vec<f64>],
    tags: &[BoundaryTag],
    degree: usize,
    prob: &OracleProblem,
    case: &CaseDefinition<f64>,
) -> (Vec<f64>, Vec<f64>, usize) {
    let dim = verts[0].len();
    let basis = OracleBasis::new(verts, degree);
    let nb = basis.len();
    let n_u = nb * dim;
    let total = n_u + nb + 1;
    let mut matrix = vec![0.0; total * total];
    let mut rhs = vec![0.0; total];
    let h_k = longest_edge(verts);
    let (nu, theta, gamma0, beta) = (prob.nu, prob.theta, prob.gamma0, prob.beta);

    let vdof = |node: usize, comp: usize| node * dim + comp;
    let pdof = |node: usize| n_u + node;

    // eps(phi_a e_c) as a full tensor from the scalar gradient
    let eps_tensor = |g: &[f64; 3], comp: usize| -> [[f64; 3]; 3] {
        let mut grad_u = [[0.0; 3]; 3];
        for (j, gj) in g.iter().enumerate().take(dim) {
            grad_u[comp][j] = *gj;
        }
        let mut eps = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                eps[i][j] = 0.5 * (grad_u[i][j] + grad_u[j][i]);
            }
        }
        eps
    };
    // (div eps(phi_a e_c))_i = (lap(phi) delta_ic + H[i][c]) / 2
    let div_eps = |h: &[[f64; 3]; 3], comp: usize| -> [f64; 3] {
        let lap: f64 = (0..dim).map(|d| h[d][d]).sum();
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(dim) {
            *o = 0.5 * (if i == comp { lap } else { 0.0 } + h[i][comp]);
        }
        out
    };

    // volume integrals
    let (points, weights) = simplex_quadrature(verts);
    for (x, w) in points.iter().zip(&weights) {
        let values: Vec<f64> = (0..nb).map(|k| basis.value(k, x)).collect();
        let grads: Vec<[f64; 3]> = (0..nb).map(|k| basis.gradient(k, x)).collect();
        let hessians: Vec<[[f64; 3]; 3]> = (0..nb).map(|k| basis.hessian(k, x)).collect();
        let f = (case.source)(x);
        for a in 0..nb {
            for cc in 0..dim {
                let eps_a = eps_tensor(&grads[a], cc);
                let dea = div_eps(&hessians[a], cc);
                let div_a = grads[a][cc];
                for b in 0..nb {
                    for ee in 0..dim {
                        let eps_b = eps_tensor(&grads[b], ee);
                        let mut dot = 0.0;
                        for i in 0..dim {
                            for j in 0..dim {
                                dot += eps_a[i][j] * eps_b[i][j];
                            }
                        }
                        matrix[(vdof(b, ee)) * total + vdof(a, cc)] += 2.0 * nu * w * dot;
                    }
                    // -(div v, p), trial pressure b; +(div u, q), test pressure b
                    matrix[(vdof(a, cc)) * total + pdof(b)] -= w * values[b] * div_a;
                    matrix[pdof(b) * total + vdof(a, cc)] += w * values[b] * div_a;
                    // stabilization: (beta/nu) h^2 (-2 nu div eps(u), grad q)
                    let mut sg = 0.0;
                    for i in 0..dim {
                        sg += dea[i] * grads[b][i];
                    }
                    matrix[pdof(b) * total + vdof(a, cc)] +=
                        beta / nu * h_k * h_k * w * (-2.0 * nu) * sg;
                }
                // rhs: (f, v)
                rhs[vdof(a, cc)] += w * f[cc] * values[a];
            }
            for b in 0..nb {
                // (beta/nu) h^2 (grad p, grad q)
                let mut gg = 0.0;
                for i in 0..dim {
                    gg += grads[a][i] * grads[b][i];
                }
                matrix[pdof(b) * total + pdof(a)] += beta / nu * h_k * h_k * w * gg;
            }
            // (beta/nu) h^2 (f, grad q)
            let mut fg = 0.0;
            for i in 0..dim {
                fg += f[i] * grads[a][i];
            }
            rhs[pdof(a)] += beta / nu * h_k * h_k * w * fg;
            // multiplier row/column
            matrix[(total - 1) * total + pdof(a)] += w * values[a];
            matrix[pdof(a) * total + (total - 1)] += w * values[a];
        }
    }

    // facet integrals: facet k is the face opposite vertex k
    for (skip, tag) in tags.iter().enumerate() {
        if *tag == BoundaryTag::DoNothing {
            continue;
        }
        let face: Vec<Vec<f64>> = (0..=dim)
            .filter(|&v| v != skip)
            .map(|v| verts[v].clone())
            .collect();
        let (n, tangents) = facet_frame(verts, &face);
        let h_e = longest_edge(&face);
        let penalty = nu * gamma0 / h_e;
        let (points, weights) = simplex_quadrature(&face_as_simplex(&face));
        for (param, w) in points.iter().zip(&weights) {
            // map the parameter point back to physical coordinates
            let x: Vec<f64> = if dim == 2 {
                (0..2)
                    .map(|d| face[0][d] + (face[1][d] - face[0][d]) * param[0])
                    .collect()
            } else {
                (0..3)
                    .map(|d| {
                        face[0][d]
                            + (face[1][d] - face[0][d]) * param[0]
                            + (face[2][d] - face[0][d]) * param[1]
                    })
                    .collect()
            };
            let w = *w
                * if dim == 2 {
                    longest_edge(&face)
                } else {
                    2.0 * facet_area(&face)
                };
            let values: Vec<f64> = (0..nb).map(|k| basis.value(k, &x)).collect();
            let grads: Vec<[f64; 3]> = (0..nb).map(|k| basis.gradient(k, &x)).collect();

            let eps_n = |k: usize, comp: usize| -> [f64; 3] {
                let eps = eps_tensor(&grads[k], comp);
                let mut out = [0.0; 3];
                for i in 0..dim {
                    for j in 0..dim {
                        out[i] += eps[i][j] * n[j];
                    }
                }
                out
            };

            for a in 0..nb {
                for cc in 0..dim {
                    let eps_a_n = eps_n(a, cc);
                    for b in 0..nb {
                        for ee in 0..dim {
                            let eps_b_n = eps_n(b, ee);
                            let entry = match tag {
                                BoundaryTag::Dirichlet => {
                                    let cons = -2.0 * nu * eps_a_n[ee] * values[b];
                                    let adj = -2.0 * theta * nu * eps_b_n[cc] * values[a];
                                    let pen = if cc == ee {
                                        penalty * values[a] * values[b]
                                    } else {
                                        0.0
                                    };
                                    cons + adj + pen
                                }
                                BoundaryTag::Slip => {
                                    let nen_a: f64 = (0..dim).map(|i| n[i] * eps_a_n[i]).sum();
                                    let nen_b: f64 = (0..dim).map(|i| n[i] * eps_b_n[i]).sum();
                                    let cons = -2.0 * nu * nen_a * values[b] * n[ee];
                                    let adj = -2.0 * theta * nu * nen_b * values[a] * n[cc];
                                    let pen =
                                        penalty * values[a] * n[cc] * values[b] * n[ee];
                                    cons + adj + pen
                                }
                                BoundaryTag::DoNothing => unreachable!(),
                            };
                            matrix[(vdof(b, ee)) * total + vdof(a, cc)] += w * entry;
                        }
                        // (p, v.n) and theta (q, u.n)
                        let t = values[b] * values[a] * n[cc];
                        matrix[(vdof(a, cc)) * total + pdof(b)] += w * t;
                        matrix[pdof(b) * total + vdof(a, cc)] += w * theta * t;
                    }
                }
            }

            // data terms
            match tag {
                BoundaryTag::Dirichlet => {
                    let h_data = (case.dirichlet_data)(&x);
                    let h_dot_n: f64 = (0..dim).map(|d| h_data[d] * n[d]).sum();
                    for b in 0..nb {
                        for ee in 0..dim {
                            let eps_b_n = eps_n(b, ee);
                            let hdot: f64 = (0..dim).map(|d| h_data[d] * eps_b_n[d]).sum();
                            rhs[vdof(b, ee)] += w
                                * (-2.0 * theta * nu * hdot + penalty * h_data[ee] * values[b]);
                        }
                        rhs[pdof(b)] += w * theta * h_dot_n * values[b];
                    }
                }
                BoundaryTag::Slip => {
                    let g = (case.slip_normal_data)(&x);
                    let s: Vec<f64> = case.tangential_tractions.iter().map(|f| f(&x)).collect();
                    for b in 0..nb {
                        for ee in 0..dim {
                            let eps_b_n = eps_n(b, ee);
                            let nen_b: f64 = (0..dim).map(|i| n[i] * eps_b_n[i]).sum();
                            let mut s_dot = 0.0;
                            for (i, si) in s.iter().enumerate() {
                                s_dot += si * tangents[i][ee];
                            }
                            rhs[vdof(b, ee)] += w
                                * (s_dot * values[b] - 2.0 * theta * nu * g * nen_b
                                    + penalty * g * values[b] * n[ee]);
                        }
                        rhs[pdof(b)] += w * theta * g * values[b];
                    }
                }
                BoundaryTag::DoNothing => unreachable!(),
            }
        }
    }

    (matrix, rhs, total)
}

/// Parameterizes a facet as a unit simplex for `simplex_quadrature`: the
/// returned weights come normalized (unit measure), the caller rescales.
pub fn face_as_simplex(face: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if face.len() == 2 {
        vec![vec![0.0], vec![1.0]]
    } else {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }
}

pub fn facet_area(face: &[Vec<f64>]) -> f64 {
    let u = [
        face[1][0] - face[0][0],
        face[1][1] - face[0][1],
        face[1][2] - face[0][2],
    ];
    let v = [
        face[2][0] - face[0][0],
        face[2][1] - face[0][1],
        face[2][2] - face[0][2],
    ];
    let c = cross(u, v);
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

// ---------------------------------------------------------------- cases --

pub fn polynomial_case(dim: usize, seed: u64) -> CaseDefinition<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut coef = move || rng.next_pm1();
    let f_coefs: Vec<f64> = (0..dim * (dim + 1)).map(|_| coef()).collect();
    let h_coefs: Vec<f64> = (0..dim * (dim + 1)).map(|_| coef()).collect();
    let g_coefs: Vec<f64> = (0..=dim).map(|_| coef()).collect();
    let s_coefs: Vec<Vec<f64>> = (0..dim - 1)
        .map(|_| (0..=dim).map(|_| coef()).collect())
        .collect();

    let affine_vec = move |coefs: Vec<f64>, dim: usize| -> VectorFn<f64> {
        Arc::new(move |x: &[f64]| {
            (0..dim)
                .map(|i| {
                    coefs[i * (dim + 1)]
                        + (0..dim)
                            .map(|d| coefs[i * (dim + 1) + 1 + d] * x[d])
                            .sum::<f64>()
                })
                .collect()
        })
    };
    let affine_scalar = move |coefs: Vec<f64>, dim: usize| -> ScalarFn<f64> {
        Arc::new(move |x: &[f64]| {
            coefs[0] + (0..dim).map(|d| coefs[1 + d] * x[d]).sum::<f64>()
        })
    };

    CaseDefinition {
        source: affine_vec(f_coefs, dim),
        dirichlet_data: affine_vec(h_coefs, dim),
        slip_normal_data: affine_scalar(g_coefs, dim),
        tangential_tractions: s_coefs
            .into_iter()
            .map(|c| affine_scalar(c, dim))
            .collect(),
        exact: None,
    }
}

pub fn random_simplex(rng: &mut SplitMix64, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let verts: Vec<Vec<f64>> = (0..=dim)
            .map(|_| (0..dim).map(|_| 2.0 * rng.next_pm1()).collect())
            .collect();
        let volume = match dim {
            2 => {
                let ax = verts[1][0] - verts[0][0];
                let ay = verts[1][1] - verts[0][1];
                let bx = verts[2][0] - verts[0][0];
                let by = verts[2][1] - verts[0][1];
                (ax * by - ay * bx) / 2.0
            }
            _ => {
                let m = |i: usize, d: usize| verts[i][d] - verts[0][d];
                (m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1))
                    - m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))
                    + m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0)))
                    / 6.0
            }
        };
        let h = longest_edge(&verts);
        // keep the shape regular enough that entries stay O(1)-scaled
        if volume.abs() > 0.05 * h.powi(dim as i32) {
            let mut verts = verts;
            if volume < 0.0 {
                verts.swap(1, 2);
            }
            return verts;
        }
    }
}

pub fn single_cell_mesh(
    verts: &[Vec<f64>],
    tags: &[BoundaryTag],
) -> Arc<SimplicialMesh<f64>> {
    let dim = verts[0].len();
    let flat: Vec<f64> = verts.iter().flatten().copied().collect();
    let cell: Vec<usize> = (0..=dim).collect();
    let facets: Vec<(BoundaryTag, Vec<usize>)> = (0..=dim)
        .map(|skip| {
            (
                tags[skip],
                (0..=dim).filter(|&v| v != skip).collect::<Vec<usize>>(),
            )
        })
        .collect();
    Arc::new(SimplicialMesh::new(dim, flat, cell, facets).unwrap())
}

/// Compares the assembled system against the oracle; panics on any entry
/// beyond 1e-12 relative and returns the worst relative deviation seen.
pub fn check_against_oracle(
    verts: &[Vec<f64>],
    tags: &[BoundaryTag],
    degree: usize,
    prob: &OracleProblem,
    seed: u64,
    label: &str,
) -> f64 {
    let dim = verts[0].len();
    let case = polynomial_case(dim, seed);
    let mesh = single_cell_mesh(verts, tags);
    let spaces = Spaces::equal_order(mesh, degree).unwrap();
    let theta = Theta::from_int(prob.theta as i64).unwrap();
    let config = ProblemConfig::new(prob.nu, theta, prob.gamma0, prob.beta, degree).unwrap();
    let system = assemble(&spaces, &config, &case).unwrap();

    let (oracle_matrix, oracle_rhs, total) = oracle_system(verts, tags, degree, prob, &case);
    assert_eq!(system.layout.total(), total, "{label}: dof count");

    let scale = oracle_matrix
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(system.matrix.max_abs());
    let mut worst = 0.0f64;
    for r in 0..total {
        for c in 0..total {
            let got = system.matrix.get(r, c);
            let want = oracle_matrix[r * total + c];
            worst = worst.max((got - want).abs() / scale);
            assert!(
                (got - want).abs() <= 1e-12 * scale,
                "{label}: matrix entry ({r}, {c}): {got} vs oracle {want} (scale {scale:.3e})"
            );
        }
    }
    let rhs_scale = oracle_rhs
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    for r in 0..total {
        worst = worst.max((system.rhs[r] - oracle_rhs[r]).abs() / rhs_scale);
        assert!(
            (system.rhs[r] - oracle_rhs[r]).abs() <= 1e-12 * rhs_scale,
            "{label}: rhs entry {r}: {} vs oracle {}",
            system.rhs[r],
            oracle_rhs[r]
        );
    }
    worst
}
