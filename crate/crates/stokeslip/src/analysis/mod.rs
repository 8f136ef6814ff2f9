//! Error norms, the mesh-dependent triple norm, slip violation, convergence
//! orders, inverse/trace constant estimation and theory-driven parameter
//! selection.

mod eigen;

pub use eigen::{generalized_max_eigenvalue, sym_eigen};

use crate::assembly::{
    assemble, assemble_matrix, AssemblyError, CaseDefinition, ExactSolution, ProblemConfig,
    ScalarFn, Theta,
};
use crate::cases::BuiltinCase;
use crate::femspace::{
    eval_ref_basis, facet_quadrature, quadrature_for, CellGeometry, DiscreteField, FemError,
    Spaces,
};
use crate::linsolve::{solve_direct, SolveError};
use crate::mesh::{BoundaryTag, SimplicialMesh};
use crate::rng::SplitMix64;
use crate::Real;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("case provides no exact solution")]
    MissingExactSolution,
    #[error("slip boundary is empty")]
    EmptySlipBoundary,
    #[error("fields or spaces belong to different discretizations")]
    SpaceMismatch,
    #[error("a convergence study needs at least two levels, got {0}")]
    NeedTwoLevels(usize),
    #[error("case `{0}` has no structured mesh recipe; supply a mesh file")]
    NotStructured(&'static str),
    #[error("solver failed at level n = {level}: {message}")]
    SolverFailed { level: usize, message: String },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Quadrature(#[from] crate::femspace::QuadratureError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Per-level error measurements.
#[derive(Clone, Debug)]
pub struct ErrorReport<T> {
    pub h: T,
    pub err_p_l2: T,
    pub err_u_l2: T,
    pub err_u_h1: T,
    /// Triple norm of the error pair `(u - u_h, p - p_h)`.
    pub triple_norm: T,
    pub slip_violation: Option<T>,
}

/// Discrete triple norm split into its velocity part (viscous energy plus
/// boundary penalties) and pressure part (scaled pressure gradients).
pub fn triple_norm_parts<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    velocity: &DiscreteField<T>,
    pressure: &DiscreteField<T>,
) -> Result<(T, T), AnalysisError> {
    if !velocity.space.matches(&spaces.velocity) || !pressure.space.matches(&spaces.pressure) {
        return Err(AnalysisError::SpaceMismatch);
    }
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let degree = config.degree;
    let nu = config.nu;
    let rule = quadrature_for::<T>(dim, 2 * degree)?;

    let mut grad = [[T::zero(); 3]; 3];
    let mut value = [T::zero(); 3];
    let mut velocity_part = T::zero();
    let mut pressure_part = T::zero();

    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        let h_k2 = mesh.cell_diameter(c) * mesh.cell_diameter(c);
        for q in 0..rule.len() {
            let mut basis = eval_ref_basis(dim, degree, rule.point(q));
            geom.push_forward_gradients_only(&mut basis);
            let w = rule.weights[q] * geom.det.abs();
            velocity.gradient_at(&spaces.velocity, c, &basis, &mut grad);
            let mut eps2 = T::zero();
            for i in 0..dim {
                for j in 0..dim {
                    let e = (grad[i][j] + grad[j][i]) / T::lit(2.0);
                    eps2 = eps2 + e * e;
                }
            }
            velocity_part = velocity_part + nu * w * eps2;
            pressure.gradient_at(&spaces.pressure, c, &basis, &mut grad);
            let mut gp2 = T::zero();
            for d in 0..dim {
                gp2 = gp2 + grad[0][d] * grad[0][d];
            }
            pressure_part = pressure_part + h_k2 / nu * w * gp2;
        }
    }

    for e in 0..mesh.n_boundary_facets() {
        let tag = mesh.boundary_facet(e).tag;
        if tag == BoundaryTag::DoNothing {
            continue;
        }
        let frame = mesh.facet_frame(e)?;
        let cell = mesh.boundary_facet(e).cell;
        let geom = spaces.velocity.cell_geometry(cell);
        let scale = nu / mesh.facet_diameter(e);
        let fq = facet_quadrature(mesh, e, 2 * degree)?;
        for q in 0..fq.n_points {
            let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[q * dim..(q + 1) * dim]);
            geom.push_forward_gradients_only(&mut basis);
            velocity.value_at(&spaces.velocity, cell, &basis, &mut value);
            let w = fq.weights[q];
            match tag {
                BoundaryTag::Dirichlet => {
                    let mut norm2 = T::zero();
                    for d in 0..dim {
                        norm2 = norm2 + value[d] * value[d];
                    }
                    velocity_part = velocity_part + scale * w * norm2;
                }
                BoundaryTag::Slip => {
                    let mut un = T::zero();
                    for d in 0..dim {
                        un = un + value[d] * frame.normal()[d];
                    }
                    velocity_part = velocity_part + scale * w * un * un;
                }
                BoundaryTag::DoNothing => unreachable!(),
            }
        }
    }
    Ok((velocity_part, pressure_part))
}

/// `|||(v, q)|||_h`: viscous energy, scaled boundary penalties and scaled
/// pressure gradients.
pub fn triple_norm<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    velocity: &DiscreteField<T>,
    pressure: &DiscreteField<T>,
) -> Result<T, AnalysisError> {
    let (v, p) = triple_norm_parts(spaces, config, velocity, pressure)?;
    Ok((v + p).sqrt())
}

/// L2 norm of `u_h . n - g` over the slip boundary.
pub fn slip_violation<T: Real>(
    spaces: &Spaces<T>,
    velocity: &DiscreteField<T>,
    g: &ScalarFn<T>,
) -> Result<T, AnalysisError> {
    if !velocity.space.matches(&spaces.velocity) {
        return Err(AnalysisError::SpaceMismatch);
    }
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let degree = spaces.degree();
    let mut acc = T::zero();
    let mut any = false;
    let mut value = [T::zero(); 3];
    for e in 0..mesh.n_boundary_facets() {
        if mesh.boundary_facet(e).tag != BoundaryTag::Slip {
            continue;
        }
        any = true;
        let frame = mesh.facet_frame(e)?;
        let cell = mesh.boundary_facet(e).cell;
        let geom = spaces.velocity.cell_geometry(cell);
        let fq = facet_quadrature(mesh, e, if dim == 2 { 8 } else { 6 })?;
        for q in 0..fq.n_points {
            let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[q * dim..(q + 1) * dim]);
            geom.push_forward_gradients_only(&mut basis);
            velocity.value_at(&spaces.velocity, cell, &basis, &mut value);
            let mut un = T::zero();
            for d in 0..dim {
                un = un + value[d] * frame.normal()[d];
            }
            let diff = un - g(&fq.phys_points[q * dim..(q + 1) * dim]);
            acc = acc + fq.weights[q] * diff * diff;
        }
    }
    if !any {
        return Err(AnalysisError::EmptySlipBoundary);
    }
    Ok(acc.sqrt())
}

/// L2/H1 velocity errors, L2 pressure error and the triple norm of the
/// error, via the fixed high-order quadrature.
pub fn error_norms<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    exact: &ExactSolution<T>,
    velocity: &DiscreteField<T>,
    pressure: &DiscreteField<T>,
) -> Result<ErrorReport<T>, AnalysisError> {
    if !velocity.space.matches(&spaces.velocity) || !pressure.space.matches(&spaces.pressure) {
        return Err(AnalysisError::SpaceMismatch);
    }
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let degree = config.degree;
    let nu = config.nu;
    let rule = quadrature_for::<T>(dim, if dim == 2 { 8 } else { 6 })?;

    let mut grad = [[T::zero(); 3]; 3];
    let mut pgrad = [[T::zero(); 3]; 3];
    let mut value = [T::zero(); 3];
    let mut pvalue = [T::zero(); 1];

    let mut err_u_l2 = T::zero();
    let mut err_u_h1 = T::zero();
    let mut err_p_l2 = T::zero();
    let mut tn_velocity = T::zero();
    let mut tn_pressure = T::zero();

    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        let h_k2 = mesh.cell_diameter(c) * mesh.cell_diameter(c);
        for q in 0..rule.len() {
            let mut basis = eval_ref_basis(dim, degree, rule.point(q));
            geom.push_forward_gradients_only(&mut basis);
            let w = rule.weights[q] * geom.det.abs();
            let mut x = [T::zero(); 3];
            geom.ref_to_phys(rule.point(q), &mut x[..dim]);

            velocity.value_at(&spaces.velocity, c, &basis, &mut value);
            velocity.gradient_at(&spaces.velocity, c, &basis, &mut grad);
            pressure.value_at(&spaces.pressure, c, &basis, &mut pvalue);
            pressure.gradient_at(&spaces.pressure, c, &basis, &mut pgrad);

            let u_exact = (exact.velocity)(&x[..dim]);
            let grad_exact = (exact.velocity_gradient)(&x[..dim]);
            let p_exact = (exact.pressure)(&x[..dim]);
            let pgrad_exact = (exact.pressure_gradient)(&x[..dim]);

            let mut du2 = T::zero();
            let mut dgrad2 = T::zero();
            let mut deps2 = T::zero();
            for i in 0..dim {
                let d = value[i] - u_exact[i];
                du2 = du2 + d * d;
                for j in 0..dim {
                    let dg = grad[i][j] - grad_exact[i * dim + j];
                    dgrad2 = dgrad2 + dg * dg;
                    let dgt = grad[j][i] - grad_exact[j * dim + i];
                    let de = (dg + dgt) / T::lit(2.0);
                    deps2 = deps2 + de * de;
                }
            }
            let dp = pvalue[0] - p_exact;
            let mut dpg2 = T::zero();
            for d in 0..dim {
                let g = pgrad[0][d] - pgrad_exact[d];
                dpg2 = dpg2 + g * g;
            }

            err_u_l2 = err_u_l2 + w * du2;
            err_u_h1 = err_u_h1 + w * dgrad2;
            err_p_l2 = err_p_l2 + w * dp * dp;
            tn_velocity = tn_velocity + nu * w * deps2;
            tn_pressure = tn_pressure + h_k2 / nu * w * dpg2;
        }
    }

    // boundary penalty parts of the error triple norm
    for e in 0..mesh.n_boundary_facets() {
        let tag = mesh.boundary_facet(e).tag;
        if tag == BoundaryTag::DoNothing {
            continue;
        }
        let frame = mesh.facet_frame(e)?;
        let cell = mesh.boundary_facet(e).cell;
        let geom = spaces.velocity.cell_geometry(cell);
        let scale = nu / mesh.facet_diameter(e);
        let fq = facet_quadrature(mesh, e, if dim == 2 { 8 } else { 6 })?;
        for q in 0..fq.n_points {
            let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[q * dim..(q + 1) * dim]);
            geom.push_forward_gradients_only(&mut basis);
            velocity.value_at(&spaces.velocity, cell, &basis, &mut value);
            let x = &fq.phys_points[q * dim..(q + 1) * dim];
            let u_exact = (exact.velocity)(x);
            let w = fq.weights[q];
            match tag {
                BoundaryTag::Dirichlet => {
                    let mut norm2 = T::zero();
                    for d in 0..dim {
                        let dv = value[d] - u_exact[d];
                        norm2 = norm2 + dv * dv;
                    }
                    tn_velocity = tn_velocity + scale * w * norm2;
                }
                BoundaryTag::Slip => {
                    let mut un = T::zero();
                    for d in 0..dim {
                        un = un + (value[d] - u_exact[d]) * frame.normal()[d];
                    }
                    tn_velocity = tn_velocity + scale * w * un * un;
                }
                BoundaryTag::DoNothing => unreachable!(),
            }
        }
    }

    Ok(ErrorReport {
        h: mesh.mesh_size(),
        err_p_l2: err_p_l2.sqrt(),
        err_u_l2: err_u_l2.sqrt(),
        err_u_h1: err_u_h1.sqrt(),
        triple_norm: (tn_velocity + tn_pressure).sqrt(),
        slip_violation: None,
    })
}

/// Observed orders between consecutive levels:
/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`. `None` for the first level
/// and wherever an error sits at roundoff level (order undefined).
pub fn convergence_orders<T: Real>(hs: &[T], errors: &[T]) -> Vec<Option<T>> {
    let floor = T::lit(1e-13);
    let mut orders = vec![None; errors.len()];
    for i in 1..errors.len() {
        if errors[i - 1] > floor && errors[i] > floor && hs[i - 1] != hs[i] {
            orders[i] = Some((errors[i - 1] / errors[i]).ln() / (hs[i - 1] / hs[i]).ln());
        }
    }
    orders
}

/// Estimated constants of the local inverse and trace inequalities.
#[derive(Clone, Debug)]
pub struct ConstantEstimates<T> {
    pub c_in: T,
    pub c_tr: T,
    pub c_in_per_cell: Vec<T>,
    /// One entry per (cell, face) pair, cells ascending, faces in local order.
    pub c_tr_per_face: Vec<T>,
}

/// Local generalized eigenproblems per cell:
///
/// * degree 1: `C_in(K) = h_K sqrt(lambda_max(stiffness, mass))`, the sharp
///   constant in `|v|_1 <= C_in / h_K ||v||_0` on `P_1(K)`;
/// * degree 2: the pair actually used by the stabilization bound, second
///   versus first derivatives: `C_in(K) = h_K sqrt(lambda_max(hessian
///   form, stiffness))` on `P_2(K)` (constants deflated);
/// * per face `E` of each cell, `C_tr(E) = h_K^{1/2}
///   sqrt(lambda_max(face mass, cell mass))`, the sharp constant in
///   `||v||_E <= C_tr h_K^{-1/2} ||v||_K`.
pub fn estimate_constants<T: Real>(
    mesh: &SimplicialMesh<T>,
    degree: usize,
) -> Result<ConstantEstimates<T>, AnalysisError> {
    let dim = mesh.dim();
    let rule = quadrature_for::<T>(dim, 2 * degree)?;
    let nb = crate::femspace::n_local_nodes(dim, degree);

    let mut c_in_per_cell = Vec::with_capacity(mesh.n_cells());
    let mut c_tr_per_face = Vec::with_capacity(mesh.n_cells() * (dim + 1));

    for c in 0..mesh.n_cells() {
        let verts: Vec<&[T]> = mesh.cell(c).iter().map(|&v| mesh.vertex(v)).collect();
        let geom = CellGeometry::new(dim, &verts);
        let h_k = mesh.cell_diameter(c);

        let mut mass = vec![T::zero(); nb * nb];
        let mut stiffness = vec![T::zero(); nb * nb];
        let mut hessian_form = vec![T::zero(); nb * nb];
        for q in 0..rule.len() {
            let mut basis = eval_ref_basis(dim, degree, rule.point(q));
            geom.push_forward(&mut basis);
            let w = rule.weights[q] * geom.det.abs();
            for i in 0..nb {
                for j in 0..nb {
                    mass[i * nb + j] = mass[i * nb + j] + w * basis.values[i] * basis.values[j];
                    let mut gd = T::zero();
                    for d in 0..dim {
                        gd = gd + basis.gradients[i * dim + d] * basis.gradients[j * dim + d];
                    }
                    stiffness[i * nb + j] = stiffness[i * nb + j] + w * gd;
                    if degree >= 2 {
                        let mut hd = T::zero();
                        for a in 0..dim {
                            for b in 0..dim {
                                hd = hd
                                    + basis.hessians[(i * dim + a) * dim + b]
                                        * basis.hessians[(j * dim + a) * dim + b];
                            }
                        }
                        hessian_form[i * nb + j] = hessian_form[i * nb + j] + w * hd;
                    }
                }
            }
        }

        let lambda = if degree == 1 {
            generalized_max_eigenvalue(&stiffness, &mass, nb)
        } else {
            generalized_max_eigenvalue(&hessian_form, &stiffness, nb)
        };
        c_in_per_cell.push(h_k * lambda.sqrt());

        // every face of this cell
        for skip in 0..=dim {
            let face: Vec<usize> = (0..=dim).filter(|&k| k != skip).collect();
            let face_mass = face_mass_matrix(mesh, c, &geom, &face, degree, nb)?;
            let lambda = generalized_max_eigenvalue(&face_mass, &mass, nb);
            c_tr_per_face.push(h_k.sqrt() * lambda.sqrt());
        }
    }

    let max = |v: &[T]| v.iter().cloned().fold(T::zero(), |a, b| a.max(b));
    Ok(ConstantEstimates {
        c_in: max(&c_in_per_cell),
        c_tr: max(&c_tr_per_face),
        c_in_per_cell,
        c_tr_per_face,
    })
}

/// Mass matrix of the cell basis restricted to one local face.
fn face_mass_matrix<T: Real>(
    mesh: &SimplicialMesh<T>,
    cell: usize,
    geom: &CellGeometry<T>,
    face_local: &[usize],
    degree: usize,
    nb: usize,
) -> Result<Vec<T>, AnalysisError> {
    let dim = mesh.dim();
    let cell_verts = mesh.cell(cell);
    let a = mesh.vertex(cell_verts[face_local[0]]);
    let mut out = vec![T::zero(); nb * nb];
    match dim {
        2 => {
            let b = mesh.vertex(cell_verts[face_local[1]]);
            let len = {
                let mut d2 = T::zero();
                for d in 0..2 {
                    let t = b[d] - a[d];
                    d2 = d2 + t * t;
                }
                d2.sqrt()
            };
            let rule = quadrature_for::<T>(1, 2 * degree)?;
            for q in 0..rule.len() {
                let t = rule.point(q)[0];
                let x = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
                let mut xi = [T::zero(); 2];
                geom.phys_to_ref(&x, &mut xi);
                let basis = eval_ref_basis(dim, degree, &xi);
                let w = rule.weights[q] * len;
                for i in 0..nb {
                    for j in 0..nb {
                        out[i * nb + j] = out[i * nb + j] + w * basis.values[i] * basis.values[j];
                    }
                }
            }
        }
        3 => {
            let b = mesh.vertex(cell_verts[face_local[1]]);
            let c = mesh.vertex(cell_verts[face_local[2]]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let area = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() / T::lit(2.0);
            let rule = quadrature_for::<T>(2, 2 * degree)?;
            for q in 0..rule.len() {
                let p = rule.point(q);
                let mut x = [T::zero(); 3];
                for d in 0..3 {
                    x[d] = a[d] + u[d] * p[0] + v[d] * p[1];
                }
                let mut xi = [T::zero(); 3];
                geom.phys_to_ref(&x, &mut xi);
                let basis = eval_ref_basis(dim, degree, &xi);
                let w = rule.weights[q] * T::lit(2.0) * area;
                for i in 0..nb {
                    for j in 0..nb {
                        out[i * nb + j] = out[i * nb + j] + w * basis.values[i] * basis.values[j];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// Parameters from the sufficient stability conditions, with fixed safety
/// factors 0.5 (on the beta bounds) and 2 (on the gamma0 bound):
///
/// * `theta = -1`: `beta = 0.5 / C_in^2`, any positive `gamma0` is
///   admissible (the caller's default is kept);
/// * `theta in {0, 1}`: `beta = 0.5 / (C_tr^2 + C_in^2)` and
///   `gamma0 = 2 C_tr^2 (1 + 2 C_in^2) / beta`.
pub fn select_parameters<T: Real>(
    theta: Theta,
    estimates: &ConstantEstimates<T>,
    default_gamma0: T,
) -> (T, T) {
    let half = T::lit(0.5);
    let c_in2 = estimates.c_in * estimates.c_in;
    let c_tr2 = estimates.c_tr * estimates.c_tr;
    match theta {
        Theta::MinusOne => (half / c_in2, default_gamma0),
        Theta::Zero | Theta::One => {
            let beta = half / (c_tr2 + c_in2);
            let gamma0 = T::lit(2.0) * c_tr2 * (T::one() + T::lit(2.0) * c_in2) / beta;
            (beta, gamma0)
        }
    }
}

/// The penalty bound of the symmetric/incomplete variants for a given
/// stabilization parameter: `gamma0 > C_tr^2 (1 + 2 C_in^2) / beta` is the
/// sufficient condition, returned here with the fixed safety factor 2.
pub fn symmetric_gamma0_bound<T: Real>(estimates: &ConstantEstimates<T>, beta: T) -> T {
    let c_in2 = estimates.c_in * estimates.c_in;
    let c_tr2 = estimates.c_tr * estimates.c_tr;
    T::lit(2.0) * c_tr2 * (T::one() + T::lit(2.0) * c_in2) / beta
}

/// Stabilization parameter specification: a fixed value or the
/// theory-driven choice from [`select_parameters`].
#[derive(Clone, Copy, Debug)]
pub enum BetaSpec<T> {
    Auto,
    Value(T),
}

impl<T: Real> BetaSpec<T> {
    /// Resolves `(beta, gamma0)` for a mesh. An explicit `gamma0` passed by
    /// the caller always wins over the selected one.
    pub fn resolve(
        &self,
        theta: Theta,
        mesh: &SimplicialMesh<T>,
        degree: usize,
        gamma0: Option<T>,
        default_gamma0: T,
    ) -> Result<(T, T), AnalysisError> {
        match self {
            BetaSpec::Value(beta) => Ok((*beta, gamma0.unwrap_or(default_gamma0))),
            BetaSpec::Auto => {
                let estimates = estimate_constants(mesh, degree)?;
                let (beta, selected_gamma0) =
                    select_parameters(theta, &estimates, gamma0.unwrap_or(default_gamma0));
                Ok((beta, gamma0.unwrap_or(selected_gamma0)))
            }
        }
    }
}

/// Result of the randomized coercivity probe.
#[derive(Clone, Debug)]
pub struct CoercivityProbe<T> {
    pub min_quotient: T,
    pub negative_samples: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// Minimum Rayleigh quotient `B_S(x, x) / |||x|||^2` over seeded random
/// fields.
///
/// Samples draw all coefficients i.i.d. uniform in [-1, 1]; the pressure
/// block is projected to zero discrete mean and then rescaled so its
/// triple-norm share matches the velocity share. The balancing makes the
/// probe informative uniformly in `nu` and `h` (otherwise the quotient of
/// an unscaled sample just tracks whichever norm component dominates).
pub fn coercivity_probe<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    n_samples: usize,
    seed: u64,
) -> Result<CoercivityProbe<T>, AnalysisError> {
    let system = assemble_matrix(spaces, config)?;
    let mut rng = SplitMix64::new(seed);
    let n_u = system.layout.n_velocity;
    let n_p = system.layout.n_pressure;
    let mut min_quotient = T::infinity();
    let mut negative = 0usize;

    for _ in 0..n_samples {
        let v_coeffs: Vec<T> = (0..n_u).map(|_| T::lit(rng.next_pm1())).collect();
        let mut p_coeffs: Vec<T> = (0..n_p).map(|_| T::lit(rng.next_pm1())).collect();
        // zero discrete mean
        let mut mean = T::zero();
        for (c, p) in system.pressure_integrals.iter().zip(&p_coeffs) {
            mean = mean + *c * *p;
        }
        mean = mean / system.domain_volume;
        for p in &mut p_coeffs {
            *p = *p - mean;
        }

        let vel = DiscreteField::from_coeffs(&spaces.velocity, v_coeffs)?;
        let mut pres = DiscreteField::from_coeffs(&spaces.pressure, p_coeffs)?;
        let (part_v, part_p) = triple_norm_parts(spaces, config, &vel, &pres)?;
        let scale = if part_p > T::zero() {
            (part_v / part_p).sqrt()
        } else {
            T::one()
        };
        for p in &mut pres.coeffs {
            *p = *p * scale;
        }
        let denom = part_v + if part_p > T::zero() { part_v } else { T::zero() };
        if !(denom > T::zero()) {
            continue;
        }

        let mut x = vec![T::zero(); system.layout.total()];
        x[..n_u].copy_from_slice(&vel.coeffs);
        x[n_u..n_u + n_p].copy_from_slice(&pres.coeffs);
        let mx = system.apply_operator(&x)?;
        let mut num = T::zero();
        for (a, b) in x.iter().zip(&mx) {
            num = num + *a * *b;
        }
        let quotient = num / denom;
        if quotient < min_quotient {
            min_quotient = quotient;
        }
        if quotient <= T::zero() {
            negative += 1;
        }
    }
    Ok(CoercivityProbe {
        min_quotient,
        negative_samples: negative,
        n_samples,
        seed,
    })
}

/// One completed refinement level of a convergence study.
#[derive(Clone, Debug)]
pub struct StudyLevel<T> {
    pub n: usize,
    pub n_dofs: usize,
    pub beta: T,
    pub gamma0: T,
    pub rel_residual: T,
    pub wall_seconds: f64,
    pub report: ErrorReport<T>,
}

/// Outcome of a study: completed levels plus an optional aborting failure.
pub struct StudyOutcome<T> {
    pub levels: Vec<StudyLevel<T>>,
    pub failure: Option<AnalysisError>,
}

#[derive(Clone, Copy, Debug)]
pub struct StudyConfig<T> {
    pub nu: T,
    pub theta: Theta,
    pub gamma0: Option<T>,
    pub beta: BetaSpec<T>,
    pub degree: usize,
    pub default_gamma0: T,
}

/// One direct solve per level on nested structured meshes, with error
/// norms against the case's exact solution. Solver failures abort the
/// study; completed levels are returned alongside the failure.
pub fn convergence_study<T: Real>(
    case: &BuiltinCase<T>,
    study: &StudyConfig<T>,
    levels: &[usize],
) -> Result<StudyOutcome<T>, AnalysisError> {
    if levels.len() < 2 {
        return Err(AnalysisError::NeedTwoLevels(levels.len()));
    }
    let mut out = StudyOutcome {
        levels: Vec::with_capacity(levels.len()),
        failure: None,
    };
    for &n in levels {
        match run_level(case, study, n) {
            Ok(level) => out.levels.push(level),
            Err(err) => {
                out.failure = Some(AnalysisError::SolverFailed {
                    level: n,
                    message: err.to_string(),
                });
                break;
            }
        }
    }
    Ok(out)
}

/// Assembles, solves and measures one structured level of a case.
pub fn run_level<T: Real>(
    case: &BuiltinCase<T>,
    study: &StudyConfig<T>,
    n: usize,
) -> Result<StudyLevel<T>, AnalysisError> {
    let start = std::time::Instant::now();
    let mesh = Arc::new(
        case.build_mesh(n)
            .ok_or(AnalysisError::NotStructured(case.name))?,
    );
    let (beta, gamma0) = study.beta.resolve(
        study.theta,
        &mesh,
        study.degree,
        study.gamma0,
        study.default_gamma0,
    )?;
    let spaces = Spaces::equal_order(mesh.clone(), study.degree)?;
    let config = ProblemConfig::new(study.nu, study.theta, gamma0, beta, study.degree)?;
    let system = assemble(&spaces, &config, &case.case)?;
    let solve = solve_direct(&system)?;
    let (u_coeffs, p_coeffs, _) = system.split_solution(&solve.solution)?;
    let u = DiscreteField::from_coeffs(&spaces.velocity, u_coeffs)?;
    let p = DiscreteField::from_coeffs(&spaces.pressure, p_coeffs)?;

    let exact = case
        .case
        .exact
        .as_ref()
        .ok_or(AnalysisError::MissingExactSolution)?;
    let mut report = error_norms(&spaces, &config, exact, &u, &p)?;
    let has_slip = mesh
        .boundary_facets()
        .iter()
        .any(|f| f.tag == BoundaryTag::Slip);
    if has_slip {
        report.slip_violation = Some(slip_violation(&spaces, &u, &case.case.slip_normal_data)?);
    }
    Ok(StudyLevel {
        n,
        n_dofs: system.layout.total(),
        beta,
        gamma0,
        rel_residual: solve.rel_residual,
        wall_seconds: start.elapsed().as_secs_f64(),
        report,
    })
}

/// Solves a case on a prebuilt mesh (used for file-based meshes and
/// one-off solves). Returns the fields and the solve report.
pub fn solve_case<T: Real>(
    case: &CaseDefinition<T>,
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
) -> Result<(DiscreteField<T>, DiscreteField<T>, crate::linsolve::SolveReport<T>), AnalysisError> {
    let system = assemble(spaces, config, case)?;
    let solve = solve_direct(&system)?;
    let (u_coeffs, p_coeffs, _) = system.split_solution(&solve.solution)?;
    let u = DiscreteField::from_coeffs(&spaces.velocity, u_coeffs)?;
    let p = DiscreteField::from_coeffs(&spaces.pressure, p_coeffs)?;
    Ok((u, p, solve))
}
