//! Quadrature rules on the unit segment, reference triangle and reference
//! tetrahedron.
//!
//! Low degrees use tabulated symmetric rules with positive weights; higher
//! degrees fall back to collapsed-coordinate (Duffy) tensor products of
//! Gauss-Legendre rules, which stay positive at any order. Every rule is
//! checked against closed-form monomial integrals when it is built.

use crate::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("unsupported quadrature dimension {0}")]
    BadDimension(usize),
    #[error("quadrature degree {degree} exceeds supported maximum {max} in {dim}D")]
    DegreeTooHigh { dim: usize, degree: usize, max: usize },
}

pub const MAX_DEGREE: usize = 16;

/// Points are reference coordinates (`dim` entries per point); weights sum
/// to the reference volume (1, 1/2, 1/6 for segment, triangle, tet).
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    pub dim: usize,
    /// Exactness degree of the rule actually returned (>= requested).
    pub degree: usize,
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[T] {
        &self.points[q * self.dim..(q + 1) * self.dim]
    }

    fn verify_monomials(&self) {
        let tol = T::lit(500.0) * T::epsilon();
        for powers in monomials(self.dim, self.degree) {
            let mut acc = T::zero();
            for q in 0..self.len() {
                let x = self.point(q);
                let mut term = self.weights[q];
                for d in 0..self.dim {
                    term = term * x[d].powi(powers[d] as i32);
                }
                acc = acc + term;
            }
            let exact = T::lit(monomial_integral(self.dim, &powers));
            assert!(
                (acc - exact).abs() <= tol,
                "quadrature (dim {}, degree {}) monomial {:?}: {} vs {}",
                self.dim,
                self.degree,
                powers,
                acc,
                exact
            );
        }
    }
}

/// Exact integral of `x^a [y^b [z^c]]` over the reference simplex.
pub fn monomial_integral(dim: usize, powers: &[usize]) -> f64 {
    // segment: a! / (a+1)!; triangle: a! b! / (a+b+2)!; tet: a! b! c! / (a+b+c+3)!
    let total: usize = powers.iter().sum();
    let mut num = 1f64;
    for &p in powers {
        num *= factorial(p);
    }
    num / factorial(total + dim)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn monomials(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match dim {
        1 => {
            for a in 0..=degree {
                out.push(vec![a]);
            }
        }
        2 => {
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    out.push(vec![a, b]);
                }
            }
        }
        3 => {
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    for c in 0..=(degree - a - b) {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Smallest supported rule exact at least to `degree` on the reference
/// simplex of dimension `dim` (1 = unit segment, used for facet integrals).
pub fn quadrature_for<T: Real>(dim: usize, degree: usize) -> Result<QuadratureRule<T>, QuadratureError> {
    if !(1..=3).contains(&dim) {
        return Err(QuadratureError::BadDimension(dim));
    }
    if degree > MAX_DEGREE {
        return Err(QuadratureError::DegreeTooHigh {
            dim,
            degree,
            max: MAX_DEGREE,
        });
    }
    let rule = match dim {
        1 => segment_rule(degree),
        2 => triangle_rule(degree),
        3 => tetrahedron_rule(degree),
        _ => unreachable!(),
    };
    rule.verify_monomials();
    Ok(rule)
}

fn segment_rule<T: Real>(degree: usize) -> QuadratureRule<T> {
    let n = degree / 2 + 1; // GL(n) is exact to 2n - 1
    let (nodes, weights) = gauss_legendre_unit(n);
    QuadratureRule {
        dim: 1,
        degree: 2 * n - 1,
        points: nodes.into_iter().map(T::lit).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
    }
}

fn triangle_rule<T: Real>(degree: usize) -> QuadratureRule<T> {
    // (degree, groups); each group (kind, a, weight) with area-normalized
    // weights summing to 1. kind: 0 = centroid, 1 = three points (1-2a, a, a).
    let tabulated: Option<(usize, &[(u8, f64, f64)])> = match degree {
        0 | 1 => Some((1, &[(0, 0.0, 1.0)])),
        2 => Some((2, &[(1, 1.0 / 6.0, 1.0 / 3.0)])),
        3 | 4 => Some((
            4,
            &[
                (1, 0.445948490915965, 0.223381589678011),
                (1, 0.091576213509771, 0.109951743655322),
            ],
        )),
        5 => Some((
            5,
            &[
                (0, 0.0, 0.225),
                (1, 0.470142064105115, 0.132394152788506),
                (1, 0.101286507323456, 0.125939180544827),
            ],
        )),
        _ => None,
    };
    if let Some((exact_degree, groups)) = tabulated {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for &(kind, a, w) in groups {
            match kind {
                0 => {
                    points.extend_from_slice(&[1.0 / 3.0, 1.0 / 3.0]);
                    weights.push(w * 0.5);
                }
                1 => {
                    let b = 1.0 - 2.0 * a;
                    for bary in [[b, a, a], [a, b, a], [a, a, b]] {
                        // reference coords (x, y) = (lambda_1, lambda_2)
                        points.extend_from_slice(&[bary[1], bary[2]]);
                        weights.push(w * 0.5);
                    }
                }
                _ => unreachable!(),
            }
        }
        QuadratureRule {
            dim: 2,
            degree: exact_degree,
            points: points.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    } else {
        duffy_triangle(degree)
    }
}

fn tetrahedron_rule<T: Real>(degree: usize) -> QuadratureRule<T> {
    match degree {
        0 | 1 => QuadratureRule {
            dim: 3,
            degree: 1,
            points: [0.25, 0.25, 0.25].iter().map(|&x| T::lit(x)).collect(),
            weights: vec![T::lit(1.0 / 6.0)],
        },
        2 => {
            let a = (5.0 - 5f64.sqrt()) / 20.0;
            let b = (5.0 + 3.0 * 5f64.sqrt()) / 20.0;
            let mut points = Vec::new();
            for bary in [[b, a, a, a], [a, b, a, a], [a, a, b, a], [a, a, a, b]] {
                points.extend_from_slice(&[bary[1], bary[2], bary[3]]);
            }
            QuadratureRule {
                dim: 3,
                degree: 2,
                points: points.into_iter().map(T::lit).collect(),
                weights: vec![T::lit(1.0 / 24.0); 4],
            }
        }
        _ => duffy_tetrahedron(degree),
    }
}

/// Collapsed-coordinate rule on the triangle: x = u (1 - v), y = v with
/// Jacobian (1 - v).
fn duffy_triangle<T: Real>(degree: usize) -> QuadratureRule<T> {
    let n = (degree + 2) / 2 + 1;
    let (nodes, weights) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n * 2);
    let mut w = Vec::with_capacity(n * n);
    for (iv, &v) in nodes.iter().enumerate() {
        for (iu, &u) in nodes.iter().enumerate() {
            points.push(T::lit(u * (1.0 - v)));
            points.push(T::lit(v));
            w.push(T::lit(weights[iu] * weights[iv] * (1.0 - v)));
        }
    }
    QuadratureRule {
        dim: 2,
        degree,
        points,
        weights: w,
    }
}

/// Collapsed-coordinate rule on the tetrahedron: x = u (1 - v)(1 - w),
/// y = v (1 - w), z = w with Jacobian (1 - v)(1 - w)^2.
fn duffy_tetrahedron<T: Real>(degree: usize) -> QuadratureRule<T> {
    let n = (degree + 3) / 2 + 1;
    let (nodes, weights) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n * n * 3);
    let mut w = Vec::with_capacity(n * n * n);
    for (iw, &wc) in nodes.iter().enumerate() {
        for (iv, &v) in nodes.iter().enumerate() {
            for (iu, &u) in nodes.iter().enumerate() {
                points.push(T::lit(u * (1.0 - v) * (1.0 - wc)));
                points.push(T::lit(v * (1.0 - wc)));
                points.push(T::lit(wc));
                w.push(T::lit(
                    weights[iu] * weights[iv] * weights[iw] * (1.0 - v) * (1.0 - wc) * (1.0 - wc),
                ));
            }
        }
    }
    QuadratureRule {
        dim: 3,
        degree,
        points,
        weights: w,
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // standard interval [-1, 1]
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to [0, 1]: descending cosine gives ascending unit nodes
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n = n (P_{n-1} - x P_n) / (1 - x^2)
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}
