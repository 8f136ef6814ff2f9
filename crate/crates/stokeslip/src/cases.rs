//! Built-in benchmark cases.
//!
//! Each case packages the problem data (source, boundary data, tangential
//! tractions, optional exact solution) plus a mesh recipe: either a
//! structured generator with a boundary tagger, or an imported mesh file
//! whose facets carry the tags.
//!
//! Tangential traction data is expressed in the facet frames documented in
//! [`crate::mesh`]: on the slip face `y = const` of a 2D box the frame is
//! `n = (0, -1)`, `t1 = (1, 0)`; on the face `x = 0` of a 3D box it is
//! `n = (-1, 0, 0)`, `t1 = (0, 0, -1)`, `t2 = (0, -1, 0)`.

use crate::assembly::{CaseDefinition, ExactSolution, ScalarFn, VectorFn};
use crate::mesh::{
    generate_structured_cube, generate_structured_square, BoundaryTag, SimplicialMesh,
};
use crate::Real;
use std::sync::Arc;

pub type TagFn<T> = Arc<dyn Fn(&[T]) -> BoundaryTag + Send + Sync>;

/// How a case obtains its mesh.
pub enum MeshRecipe<T> {
    Square { bbox: (T, T, T, T), tagger: TagFn<T> },
    Cube { bbox: (T, T, T, T, T, T), tagger: TagFn<T> },
    /// Unstructured mesh supplied by the user; tags come from the file.
    FromFile,
}

pub struct BuiltinCase<T> {
    pub name: &'static str,
    pub dim: usize,
    pub case: CaseDefinition<T>,
    pub mesh: MeshRecipe<T>,
    /// Viscosity the case data was derived for (CLI default).
    pub default_nu: f64,
}

impl<T: Real> BuiltinCase<T> {
    /// Builds the structured mesh at refinement level `n`.
    pub fn build_mesh(&self, n: usize) -> Option<SimplicialMesh<T>> {
        match &self.mesh {
            MeshRecipe::Square { bbox, tagger } => {
                let tagger = tagger.clone();
                Some(generate_structured_square(n, *bbox, move |x| tagger(x)))
            }
            MeshRecipe::Cube { bbox, tagger } => {
                let tagger = tagger.clone();
                Some(generate_structured_cube(n, *bbox, move |x| tagger(x)))
            }
            MeshRecipe::FromFile => None,
        }
    }
}

/// Case names accepted by the CLI.
pub fn by_name<T: Real>(name: &str, nu: T) -> Option<BuiltinCase<T>> {
    match name {
        "cavity2d" => Some(cavity2d(nu)),
        "patch2d" => Some(patch_constant_flow(2, nu)),
        "patch3d" => Some(patch_constant_flow(3, nu)),
        "patch-affine3d" => Some(patch_affine3d(nu)),
        "manufactured2d" => Some(manufactured_pressure2d(nu)),
        "naca2d" => Some(naca2d(nu)),
        "cylinder3d" => Some(cylinder3d(nu)),
        _ => None,
    }
}

pub const CASE_NAMES: [&str; 7] = [
    "cavity2d",
    "patch2d",
    "patch3d",
    "patch-affine3d",
    "manufactured2d",
    "naca2d",
    "cylinder3d",
];

fn slip_on_bottom<T: Real>(ymin: f64) -> TagFn<T> {
    Arc::new(move |x: &[T]| {
        if (x[1].as_f64() - ymin).abs() < 1e-9 {
            BoundaryTag::Slip
        } else {
            BoundaryTag::Dirichlet
        }
    })
}

/// Lid-style cavity on (-1, 1)^2 with slip along y = -1.
///
/// Exact solution `u = (2y(1 - x^2), -2x(1 - y^2))`, `p = 0`; the source is
/// `f = nu (4y, -4x)`, the slip data is `g = 0` and the tangential traction
/// along y = -1 (frame `t1 = (1, 0)`) is `s1 = 2 nu (x^2 - 1)`. The
/// Dirichlet data is the nonhomogeneous exact trace. Since the exact
/// pressure vanishes, the reported pressure error is purely discrete.
pub fn cavity2d<T: Real>(nu: T) -> BuiltinCase<T> {
    let velocity: VectorFn<T> = Arc::new(|x: &[T]| {
        let one = T::one();
        let two = T::lit(2.0);
        vec![
            two * x[1] * (one - x[0] * x[0]),
            -two * x[0] * (one - x[1] * x[1]),
        ]
    });
    let velocity_gradient: VectorFn<T> = Arc::new(|x: &[T]| {
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        vec![
            -four * x[0] * x[1],
            two * (T::one() - x[0] * x[0]),
            -two * (T::one() - x[1] * x[1]),
            four * x[0] * x[1],
        ]
    });
    let source: VectorFn<T> = Arc::new(move |x: &[T]| {
        let four = T::lit(4.0);
        vec![four * nu * x[1], -four * nu * x[0]]
    });
    let s1: ScalarFn<T> = Arc::new(move |x: &[T]| T::lit(2.0) * nu * (x[0] * x[0] - T::one()));

    BuiltinCase {
        name: "cavity2d",
        dim: 2,
        case: CaseDefinition {
            source,
            dirichlet_data: velocity.clone(),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: vec![s1],
            exact: Some(ExactSolution {
                velocity,
                velocity_gradient,
                pressure: Arc::new(|_: &[T]| T::zero()),
                pressure_gradient: Arc::new(|_: &[T]| vec![T::zero(), T::zero()]),
            }),
        },
        mesh: MeshRecipe::Square {
            bbox: (T::lit(-1.0), T::lit(-1.0), T::lit(1.0), T::lit(1.0)),
            tagger: slip_on_bottom(-1.0),
        },
        default_nu: 1.0,
    }
}

/// Uniform flow `u = (1, 0, ...)`, `p = 0` on the unit box, slip along
/// y = 0. The flow lies in every discrete space, so the solver must
/// reproduce it to roundoff for every Nitsche variant.
pub fn patch_constant_flow<T: Real>(dim: usize, _nu: T) -> BuiltinCase<T> {
    assert!(dim == 2 || dim == 3);
    let velocity: VectorFn<T> = Arc::new(move |_: &[T]| {
        let mut u = vec![T::zero(); dim];
        u[0] = T::one();
        u
    });
    let velocity_gradient: VectorFn<T> = Arc::new(move |_: &[T]| vec![T::zero(); dim * dim]);
    let mesh = if dim == 2 {
        MeshRecipe::Square {
            bbox: (T::zero(), T::zero(), T::one(), T::one()),
            tagger: slip_on_bottom(0.0),
        }
    } else {
        MeshRecipe::Cube {
            bbox: (
                T::zero(),
                T::zero(),
                T::zero(),
                T::one(),
                T::one(),
                T::one(),
            ),
            tagger: slip_on_bottom(0.0),
        }
    };
    BuiltinCase {
        name: if dim == 2 { "patch2d" } else { "patch3d" },
        dim,
        case: CaseDefinition {
            source: Arc::new(move |_: &[T]| vec![T::zero(); dim]),
            dirichlet_data: velocity.clone(),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: (0..dim - 1)
                .map(|_| Arc::new(|_: &[T]| T::zero()) as ScalarFn<T>)
                .collect(),
            exact: Some(ExactSolution {
                velocity,
                velocity_gradient,
                pressure: Arc::new(|_: &[T]| T::zero()),
                pressure_gradient: Arc::new(move |_: &[T]| vec![T::zero(); dim]),
            }),
        },
        mesh,
        default_nu: 1.0,
    }
}

/// Divergence-free affine flow on the unit cube with slip along x = 0,
/// where the prescribed normal velocity `g = -u_1` is nonzero. The affine
/// field lies in every discrete space (consistency patch test with
/// nontrivial `g` and tangential tractions).
pub fn patch_affine3d<T: Real>(nu: T) -> BuiltinCase<T> {
    // u = A x + b with trace(A) = 0
    let a_mat = [[1.0, 2.0, 0.0], [0.0, -3.0, 1.0], [2.0, 1.0, 2.0]];
    let b_vec = [1.0, -1.0, 0.5];
    let velocity: VectorFn<T> = Arc::new(move |x: &[T]| {
        (0..3)
            .map(|i| {
                let mut acc = T::lit(b_vec[i]);
                for j in 0..3 {
                    acc = acc + T::lit(a_mat[i][j]) * x[j];
                }
                acc
            })
            .collect()
    });
    let velocity_gradient: VectorFn<T> =
        Arc::new(move |_: &[T]| a_mat.iter().flatten().map(|&v| T::lit(v)).collect());
    let g: ScalarFn<T> = {
        let velocity = velocity.clone();
        Arc::new(move |x: &[T]| -velocity(x)[0])
    };
    // sigma = 2 nu eps(u) is constant; on x = 0 the frame is n = (-1,0,0),
    // t1 = (0,0,-1), t2 = (0,-1,0), so s_i = (sigma n) . t_i
    let eps = [[1.0, 1.0, 1.0], [1.0, -3.0, 1.0], [1.0, 1.0, 2.0]];
    let sigma_n = [-2.0 * eps[0][0], -2.0 * eps[1][0], -2.0 * eps[2][0]];
    let s1_val = -sigma_n[2]; // dot with (0, 0, -1)
    let s2_val = -sigma_n[1]; // dot with (0, -1, 0)
    let s1: ScalarFn<T> = Arc::new(move |_: &[T]| nu * T::lit(s1_val));
    let s2: ScalarFn<T> = Arc::new(move |_: &[T]| nu * T::lit(s2_val));

    BuiltinCase {
        name: "patch-affine3d",
        dim: 3,
        case: CaseDefinition {
            source: Arc::new(|_: &[T]| vec![T::zero(); 3]),
            dirichlet_data: velocity.clone(),
            slip_normal_data: g,
            tangential_tractions: vec![s1, s2],
            exact: Some(ExactSolution {
                velocity,
                velocity_gradient,
                pressure: Arc::new(|_: &[T]| T::zero()),
                pressure_gradient: Arc::new(|_: &[T]| vec![T::zero(); 3]),
            }),
        },
        mesh: MeshRecipe::Cube {
            bbox: (
                T::zero(),
                T::zero(),
                T::zero(),
                T::one(),
                T::one(),
                T::one(),
            ),
            tagger: Arc::new(|x: &[T]| {
                if x[0].as_f64().abs() < 1e-9 {
                    BoundaryTag::Slip
                } else {
                    BoundaryTag::Dirichlet
                }
            }),
        },
        default_nu: 1.0,
    }
}

/// Manufactured case with a genuinely nonzero pressure on (-1, 1)^2:
/// `u = curl psi` with `psi = (1 - x^2)^2 (1 - y^2)^2` (divergence-free,
/// zero trace) and `p = sin(pi x) cos(pi y)` (odd in x, hence zero mean).
/// Slip along y = -1 with `g = 0` and `s1 = -8 nu (1 - x^2)^2`.
pub fn manufactured_pressure2d<T: Real>(nu: T) -> BuiltinCase<T> {
    // psi = A(x) B(y); u = (A B', -A' B)
    fn a(x: f64) -> f64 {
        (1.0 - x * x).powi(2)
    }
    fn da(x: f64) -> f64 {
        -4.0 * x + 4.0 * x * x * x
    }
    fn dda(x: f64) -> f64 {
        -4.0 + 12.0 * x * x
    }
    fn ddda(x: f64) -> f64 {
        24.0 * x
    }

    let velocity: VectorFn<T> = Arc::new(|x: &[T]| {
        let (xf, yf) = (x[0].as_f64(), x[1].as_f64());
        vec![T::lit(a(xf) * da(yf)), T::lit(-da(xf) * a(yf))]
    });
    let velocity_gradient: VectorFn<T> = Arc::new(|x: &[T]| {
        let (xf, yf) = (x[0].as_f64(), x[1].as_f64());
        vec![
            T::lit(da(xf) * da(yf)),
            T::lit(a(xf) * dda(yf)),
            T::lit(-dda(xf) * a(yf)),
            T::lit(-da(xf) * da(yf)),
        ]
    });
    let pressure: ScalarFn<T> = Arc::new(|x: &[T]| {
        let (xf, yf) = (x[0].as_f64(), x[1].as_f64());
        T::lit((std::f64::consts::PI * xf).sin() * (std::f64::consts::PI * yf).cos())
    });
    let pressure_gradient: VectorFn<T> = Arc::new(|x: &[T]| {
        let pi = std::f64::consts::PI;
        let (xf, yf) = (x[0].as_f64(), x[1].as_f64());
        vec![
            T::lit(pi * (pi * xf).cos() * (pi * yf).cos()),
            T::lit(-pi * (pi * xf).sin() * (pi * yf).sin()),
        ]
    });
    let source: VectorFn<T> = {
        let pressure_gradient = pressure_gradient.clone();
        Arc::new(move |x: &[T]| {
            let (xf, yf) = (x[0].as_f64(), x[1].as_f64());
            // f = -nu lap(u) + grad p for divergence-free u
            let lap_u1 = dda(xf) * da(yf) + a(xf) * ddda(yf);
            let lap_u2 = -ddda(xf) * a(yf) - da(xf) * dda(yf);
            let gp = pressure_gradient(x);
            vec![
                -nu * T::lit(lap_u1) + gp[0],
                -nu * T::lit(lap_u2) + gp[1],
            ]
        })
    };
    let s1: ScalarFn<T> =
        Arc::new(move |x: &[T]| -T::lit(8.0) * nu * T::lit(a(x[0].as_f64())));

    BuiltinCase {
        name: "manufactured2d",
        dim: 2,
        case: CaseDefinition {
            source,
            dirichlet_data: velocity.clone(),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: vec![s1],
            exact: Some(ExactSolution {
                velocity,
                velocity_gradient,
                pressure,
                pressure_gradient,
            }),
        },
        mesh: MeshRecipe::Square {
            bbox: (T::lit(-1.0), T::lit(-1.0), T::lit(1.0), T::lit(1.0)),
            tagger: slip_on_bottom(-1.0),
        },
        default_nu: 1.0,
    }
}

/// External-flow demo: uniform far-field velocity on the box boundary,
/// slip with zero tangential traction on the wing surface. Qualitative
/// only; requires an imported tagged mesh.
pub fn naca2d<T: Real>(_nu: T) -> BuiltinCase<T> {
    let far_field = 51.4814;
    BuiltinCase {
        name: "naca2d",
        dim: 2,
        case: CaseDefinition {
            source: Arc::new(|_: &[T]| vec![T::zero(); 2]),
            dirichlet_data: Arc::new(move |_: &[T]| vec![T::lit(far_field), T::zero()]),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: vec![Arc::new(|_: &[T]| T::zero())],
            exact: None,
        },
        mesh: MeshRecipe::FromFile,
        default_nu: 1e-3,
    }
}

/// 3D duct with a cylinder: parabolic-type inflow at x = 0, no-slip on the
/// lateral walls, slip on the cylinder surface, do-nothing at the outflow
/// (tagged in the mesh file). Qualitative only.
pub fn cylinder3d<T: Real>(_nu: T) -> BuiltinCase<T> {
    let u_m = 0.45;
    let h = 0.41;
    BuiltinCase {
        name: "cylinder3d",
        dim: 3,
        case: CaseDefinition {
            source: Arc::new(|_: &[T]| vec![T::zero(); 3]),
            dirichlet_data: Arc::new(move |x: &[T]| {
                // inflow profile on the x = 0 plane, homogeneous elsewhere
                if x[0].as_f64().abs() < 1e-9 {
                    let (y, z) = (x[1].as_f64(), x[2].as_f64());
                    let u1 = 16.0 * u_m * y * z * (h - y) * (h - z) / h.powi(4);
                    vec![T::lit(u1), T::zero(), T::zero()]
                } else {
                    vec![T::zero(); 3]
                }
            }),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: vec![
                Arc::new(|_: &[T]| T::zero()),
                Arc::new(|_: &[T]| T::zero()),
            ],
            exact: None,
        },
        mesh: MeshRecipe::FromFile,
        default_nu: 1e-3,
    }
}

/// Central finite difference of the strong operator `-div sigma(u, p)`
/// built from the case's exact first derivatives; used to spot-check the
/// hand-derived sources.
pub fn strong_residual_fd_nu<T: Real>(
    case: &CaseDefinition<T>,
    dim: usize,
    x: &[f64],
    nu: f64,
) -> Vec<f64> {
    let exact = case.exact.as_ref().expect("case provides an exact solution");
    let h = 1e-5;
    let sigma = |y: &[f64], i: usize, j: usize| -> f64 {
        let yt: Vec<T> = y.iter().map(|&v| T::lit(v)).collect();
        let grad = (exact.velocity_gradient)(&yt);
        let p = (exact.pressure)(&yt).as_f64();
        let eps = 0.5 * (grad[i * dim + j].as_f64() + grad[j * dim + i].as_f64());
        2.0 * nu * eps - if i == j { p } else { 0.0 }
    };
    (0..dim)
        .map(|i| {
            let mut div = 0.0;
            for j in 0..dim {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                div += (sigma(&xp, i, j) - sigma(&xm, i, j)) / (2.0 * h);
            }
            -div
        })
        .collect()
}
