//! Assembly of the stabilized Nitsche system for the Stokes problem.
//!
//! The bilinear form combines, for trial `(u, p)` and test `(v, q)`:
//!
//! * volume terms `2 nu (eps(u), eps(v)) - (div v, p) + (div u, q)`;
//! * Nitsche terms on Dirichlet facets:
//!   `-2 nu (eps(u) n, v) - 2 theta nu (eps(v) n, u) + nu gamma0 / h_E (u, v)
//!    + (p, v.n) + theta (q, u.n)`;
//! * Nitsche terms on slip facets, acting on normal components only:
//!   `-2 nu (eps(u)n.n, v.n) - 2 theta nu (eps(v)n.n, u.n)
//!    + nu gamma0 / h_E (u.n, v.n) + (p, v.n) + theta (q, u.n)`;
//! * the residual pressure stabilization
//!   `(beta / nu) sum_K h_K^2 (-2 nu div eps(u) + grad p, grad q)_K`;
//! * one extra row/column tying the discrete pressure mean to zero through
//!   a scalar multiplier.
//!
//! Do-nothing facets contribute no terms. The right-hand side carries the
//! matching data terms (`theta`-weighted consistency, `nu gamma0` penalties,
//! tangential tractions and the stabilization source).
//!
//! Degrees of freedom: velocity components interleaved per node, pressure
//! appended after all velocity dofs, multiplier last. Assembly order is
//! fixed (cells ascending, Dirichlet facets, slip facets, constraint), so
//! assembled systems are bitwise reproducible.

mod bilinear;

pub use bilinear::{bilinear_value, velocity_div_eps};

use crate::femspace::{
    eval_ref_basis, facet_quadrature, quadrature_for, FemError, QuadratureRule, RefBasis, Spaces,
};
use crate::mesh::{BoundaryTag, MeshError};
use crate::sparse::{CsrMatrix, SparseError};
use crate::Real;
use std::sync::Arc;
use thiserror::Error;

/// Sign of the adjoint consistency terms: symmetric (`1`), incomplete
/// (`0`) or skew-symmetric (`-1`, coercive for any positive penalty).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theta {
    MinusOne,
    Zero,
    One,
}

impl Theta {
    pub fn value<T: Real>(self) -> T {
        match self {
            Theta::MinusOne => -T::one(),
            Theta::Zero => T::zero(),
            Theta::One => T::one(),
        }
    }

    pub fn from_int(i: i64) -> Option<Self> {
        match i {
            -1 => Some(Theta::MinusOne),
            0 => Some(Theta::Zero),
            1 => Some(Theta::One),
            _ => None,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Theta::MinusOne => -1,
            Theta::Zero => 0,
            Theta::One => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("invalid problem configuration: {0}")]
    InvalidConfig(String),
    #[error("fields or spaces belong to different discretizations")]
    SpaceMismatch,
    #[error("operand length {got} does not match system dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Quadrature(#[from] crate::femspace::QuadratureError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Method parameters: viscosity, Nitsche variant and penalty, stabilization
/// weight, polynomial degree.
#[derive(Clone, Copy, Debug)]
pub struct ProblemConfig<T> {
    pub nu: T,
    pub theta: Theta,
    pub gamma0: T,
    pub beta: T,
    pub degree: usize,
}

impl<T: Real> ProblemConfig<T> {
    pub fn new(nu: T, theta: Theta, gamma0: T, beta: T, degree: usize) -> Result<Self, AssemblyError> {
        if !(nu > T::zero()) {
            return Err(AssemblyError::InvalidConfig(format!("nu = {nu} must be positive")));
        }
        if !(gamma0 > T::zero()) {
            return Err(AssemblyError::InvalidConfig(format!(
                "gamma0 = {gamma0} must be positive"
            )));
        }
        if !(beta > T::zero()) {
            return Err(AssemblyError::InvalidConfig(format!("beta = {beta} must be positive")));
        }
        if !(1..=2).contains(&degree) {
            return Err(AssemblyError::InvalidConfig(format!(
                "degree = {degree} not supported (1 or 2)"
            )));
        }
        Ok(ProblemConfig {
            nu,
            theta,
            gamma0,
            beta,
            degree,
        })
    }
}

pub type ScalarFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// Closed-form solution data for error evaluation.
#[derive(Clone)]
pub struct ExactSolution<T> {
    pub velocity: VectorFn<T>,
    /// Row-major Jacobian, `grad[i * dim + j] = d u_i / d x_j`.
    pub velocity_gradient: VectorFn<T>,
    pub pressure: ScalarFn<T>,
    pub pressure_gradient: VectorFn<T>,
}

/// Problem data: volumetric source, Dirichlet velocity, prescribed normal
/// velocity and tangential tractions on the slip boundary.
///
/// The tangential tractions `s_i` are understood with respect to the facet
/// frames produced by [`crate::mesh::SimplicialMesh::facet_frame`]; see the
/// tangent conventions documented there.
#[derive(Clone)]
pub struct CaseDefinition<T> {
    pub source: VectorFn<T>,
    pub dirichlet_data: VectorFn<T>,
    pub slip_normal_data: ScalarFn<T>,
    pub tangential_tractions: Vec<ScalarFn<T>>,
    pub exact: Option<ExactSolution<T>>,
}

impl<T: Real> CaseDefinition<T> {
    /// Case with all data zero (used to assemble bare operators).
    pub fn homogeneous(dim: usize) -> Self {
        CaseDefinition {
            source: Arc::new(move |_: &[T]| vec![T::zero(); dim]),
            dirichlet_data: Arc::new(move |_: &[T]| vec![T::zero(); dim]),
            slip_normal_data: Arc::new(|_: &[T]| T::zero()),
            tangential_tractions: (0..dim - 1)
                .map(|_| Arc::new(|_: &[T]| T::zero()) as ScalarFn<T>)
                .collect(),
            exact: None,
        }
    }
}

/// Dof layout of the saddle-point system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    pub dim: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
}

impl DofLayout {
    pub fn total(&self) -> usize {
        self.n_velocity + self.n_pressure + 1
    }

    pub fn multiplier(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    pub fn velocity_dof(&self, node: usize, comp: usize) -> usize {
        node * self.dim + comp
    }

    pub fn pressure_dof(&self, node: usize) -> usize {
        self.n_velocity + node
    }
}

/// Assembled sparse system with the zero-mean bookkeeping.
pub struct AssembledSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub layout: DofLayout,
    /// Integrals of the pressure basis functions (the multiplier row).
    pub pressure_integrals: Vec<T>,
    pub domain_volume: T,
}

impl<T: Real> AssembledSystem<T> {
    /// `y = M x`.
    pub fn apply_operator(&self, x: &[T]) -> Result<Vec<T>, AssemblyError> {
        if x.len() != self.layout.total() {
            return Err(AssemblyError::DimensionMismatch {
                got: x.len(),
                expected: self.layout.total(),
            });
        }
        let mut y = vec![T::zero(); self.layout.total()];
        self.matrix.matvec(x, &mut y)?;
        Ok(y)
    }

    /// Splits a solution vector into velocity and pressure coefficient
    /// slices; the pressure part is shifted to exact zero discrete mean.
    pub fn split_solution(&self, x: &[T]) -> Result<(Vec<T>, Vec<T>, T), AssemblyError> {
        if x.len() != self.layout.total() {
            return Err(AssemblyError::DimensionMismatch {
                got: x.len(),
                expected: self.layout.total(),
            });
        }
        let velocity = x[..self.layout.n_velocity].to_vec();
        let mut pressure = x[self.layout.n_velocity..self.layout.multiplier()].to_vec();
        let mut mean = T::zero();
        for (c, p) in self.pressure_integrals.iter().zip(&pressure) {
            mean = mean + *c * *p;
        }
        mean = mean / self.domain_volume;
        for p in &mut pressure {
            *p = *p - mean;
        }
        Ok((velocity, pressure, x[self.layout.multiplier()]))
    }
}

struct VolumeRules<T> {
    matrix: QuadratureRule<T>,
    rhs: QuadratureRule<T>,
}

fn volume_rules<T: Real>(dim: usize, degree: usize) -> Result<VolumeRules<T>, FemError> {
    // Bilinear terms are polynomials of degree <= 2 * degree; data terms use
    // the fixed high-order rule so quadrature error stays below
    // discretization error.
    Ok(VolumeRules {
        matrix: quadrature_for(dim, 2 * degree)?,
        rhs: quadrature_for(dim, if dim == 2 { 8 } else { 6 })?,
    })
}

/// Assembles matrix and right-hand side.
pub fn assemble<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    case: &CaseDefinition<T>,
) -> Result<AssembledSystem<T>, AssemblyError> {
    assemble_impl(spaces, config, Some(case), None)
}

/// Assembles the operator only (zero right-hand side).
pub fn assemble_matrix<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
) -> Result<AssembledSystem<T>, AssemblyError> {
    assemble_impl(spaces, config, None, None)
}

/// Assembly variant with a distinct penalty on the slip boundary
/// (`gamma0` of the config applies to the Dirichlet facets only). Used by
/// the slip-violation sweeps, which vary the slip penalty against an
/// otherwise fixed discretization.
pub fn assemble_with_slip_penalty<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    case: &CaseDefinition<T>,
    slip_gamma0: T,
) -> Result<AssembledSystem<T>, AssemblyError> {
    if !(slip_gamma0 > T::zero()) {
        return Err(AssemblyError::InvalidConfig(format!(
            "slip gamma0 = {slip_gamma0} must be positive"
        )));
    }
    assemble_impl(spaces, config, Some(case), Some(slip_gamma0))
}

fn assemble_impl<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    case: Option<&CaseDefinition<T>>,
    slip_gamma0: Option<T>,
) -> Result<AssembledSystem<T>, AssemblyError> {
    ProblemConfig::new(config.nu, config.theta, config.gamma0, config.beta, config.degree)?;
    if spaces.velocity.degree() != config.degree || spaces.pressure.degree() != config.degree {
        return Err(AssemblyError::InvalidConfig(format!(
            "spaces have degree {}, config requests {}",
            spaces.velocity.degree(),
            config.degree
        )));
    }
    let mesh = spaces.mesh().clone();
    let dim = mesh.dim();
    if let Some(case) = case {
        if case.tangential_tractions.len() != dim - 1 {
            return Err(AssemblyError::InvalidConfig(format!(
                "case provides {} tangential tractions, expected {}",
                case.tangential_tractions.len(),
                dim - 1
            )));
        }
    }
    let layout = DofLayout {
        dim,
        n_velocity: spaces.velocity.n_dofs(),
        n_pressure: spaces.pressure.n_dofs(),
    };
    let total = layout.total();
    let nu = config.nu;
    let beta = config.beta;

    let rules = volume_rules::<T>(dim, config.degree)?;
    let nb = spaces.velocity.nodes_per_cell();

    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut rhs = vec![T::zero(); total];
    let mut pressure_integrals = vec![T::zero(); layout.n_pressure];
    let mut domain_volume = T::zero();

    // Reference bases at the volume quadrature points are cell-independent.
    let ref_basis_matrix: Vec<RefBasis<T>> = (0..rules.matrix.len())
        .map(|q| eval_ref_basis(dim, config.degree, rules.matrix.point(q)))
        .collect();
    let ref_basis_rhs: Vec<RefBasis<T>> = (0..rules.rhs.len())
        .map(|q| eval_ref_basis(dim, config.degree, rules.rhs.point(q)))
        .collect();

    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        let detw = geom.det.abs();
        let h_k = mesh.cell_diameter(c);
        let h_k2 = h_k * h_k;
        let nodes = spaces.velocity.cell_nodes(c);
        domain_volume = domain_volume + geom.volume();

        for (q, rb) in ref_basis_matrix.iter().enumerate() {
            let mut basis = RefBasis {
                n: rb.n,
                dim,
                values: rb.values.clone(),
                gradients: rb.gradients.clone(),
                hessians: rb.hessians.clone(),
            };
            geom.push_forward(&mut basis);
            let w = rules.matrix.weights[q] * detw;

            // Laplacians of the scalar basis (for the stabilization residual)
            let mut laplace = vec![T::zero(); nb];
            for k in 0..nb {
                for d in 0..dim {
                    laplace[k] = laplace[k] + basis.hessians[(k * dim + d) * dim + d];
                }
            }

            for a in 0..nb {
                let ga = &basis.gradients[a * dim..(a + 1) * dim];
                for b in 0..nb {
                    let gb = &basis.gradients[b * dim..(b + 1) * dim];
                    let mut grad_dot = T::zero();
                    for d in 0..dim {
                        grad_dot = grad_dot + ga[d] * gb[d];
                    }

                    // 2 nu (eps(u), eps(v)); trial (a, c), test (b, e)
                    for cc in 0..dim {
                        for ee in 0..dim {
                            let mut entry = ga[ee] * gb[cc];
                            if cc == ee {
                                entry = entry + grad_dot;
                            }
                            triplets.push((
                                layout.velocity_dof(nodes[b], ee),
                                layout.velocity_dof(nodes[a], cc),
                                nu * w * entry,
                            ));
                        }
                    }

                    // -(div v, p) and +(div u, q), sharing one product so the
                    // theta = -1 coupling blocks are exact negated transposes
                    for cc in 0..dim {
                        let t = w * basis.values[b] * ga[cc];
                        triplets.push((
                            layout.velocity_dof(nodes[a], cc),
                            layout.pressure_dof(nodes[b]),
                            -t,
                        ));
                        triplets.push((
                            layout.pressure_dof(nodes[b]),
                            layout.velocity_dof(nodes[a], cc),
                            t,
                        ));
                    }

                    // (beta / nu) h_K^2 (grad p, grad q)
                    triplets.push((
                        layout.pressure_dof(nodes[b]),
                        layout.pressure_dof(nodes[a]),
                        beta / nu * h_k2 * w * grad_dot,
                    ));

                    // (beta / nu) h_K^2 (-2 nu div eps(u), grad q)
                    //   (div eps(phi_a e_c))_i = (delta_ic lap(phi_a) + H_a[i][c]) / 2
                    for cc in 0..dim {
                        let mut entry = T::zero();
                        for i in 0..dim {
                            let mut dei = basis.hessians[(a * dim + i) * dim + cc];
                            if i == cc {
                                dei = dei + laplace[a];
                            }
                            entry = entry + dei * gb[i];
                        }
                        triplets.push((
                            layout.pressure_dof(nodes[b]),
                            layout.velocity_dof(nodes[a], cc),
                            -beta * h_k2 * w * entry,
                        ));
                    }
                }

                // multiplier column entries: integral of each pressure basis
                pressure_integrals[nodes[a]] = pressure_integrals[nodes[a]] + w * basis.values[a];
            }
        }

        // data terms
        if let Some(case) = case {
            for (q, rb) in ref_basis_rhs.iter().enumerate() {
                let mut basis = RefBasis {
                    n: rb.n,
                    dim,
                    values: rb.values.clone(),
                    gradients: rb.gradients.clone(),
                    hessians: Vec::new(),
                };
                geom.push_forward_gradients_only(&mut basis);
                let w = rules.rhs.weights[q] * detw;
                let mut x = [T::zero(); 3];
                geom.ref_to_phys(rules.rhs.point(q), &mut x[..dim]);
                let f = (case.source)(&x[..dim]);
                for b in 0..nb {
                    for ee in 0..dim {
                        rhs[layout.velocity_dof(nodes[b], ee)] =
                            rhs[layout.velocity_dof(nodes[b], ee)] + w * f[ee] * basis.values[b];
                    }
                    // (beta / nu) h_K^2 (f, grad q)
                    let gb = &basis.gradients[b * dim..(b + 1) * dim];
                    let mut fg = T::zero();
                    for d in 0..dim {
                        fg = fg + f[d] * gb[d];
                    }
                    rhs[layout.pressure_dof(nodes[b])] =
                        rhs[layout.pressure_dof(nodes[b])] + beta / nu * h_k2 * w * fg;
                }
            }
        }
    }

    // Nitsche facet terms: Dirichlet first, then slip, ascending.
    for pass_tag in [BoundaryTag::Dirichlet, BoundaryTag::Slip] {
        for e in 0..mesh.n_boundary_facets() {
            if mesh.boundary_facet(e).tag != pass_tag {
                continue;
            }
            assemble_facet(
                spaces, config, case, e, pass_tag, slip_gamma0, &layout, &mut triplets, &mut rhs,
            )?;
        }
    }

    // zero-mean constraint row/column
    let mult = layout.multiplier();
    for j in 0..layout.n_pressure {
        let cj = pressure_integrals[j];
        triplets.push((mult, layout.n_velocity + j, cj));
        triplets.push((layout.n_velocity + j, mult, cj));
    }

    let matrix = CsrMatrix::from_triplets(total, total, &triplets)?;
    Ok(AssembledSystem {
        matrix,
        rhs,
        layout,
        pressure_integrals,
        domain_volume,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble_facet<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    case: Option<&CaseDefinition<T>>,
    e: usize,
    tag: BoundaryTag,
    slip_gamma0: Option<T>,
    layout: &DofLayout,
    triplets: &mut Vec<(usize, usize, T)>,
    rhs: &mut [T],
) -> Result<(), AssemblyError> {
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let degree = config.degree;
    let nu = config.nu;
    let theta: T = config.theta.value();
    let h_e = mesh.facet_diameter(e);
    let gamma0 = match tag {
        BoundaryTag::Slip => slip_gamma0.unwrap_or(config.gamma0),
        _ => config.gamma0,
    };
    let penalty = nu * gamma0 / h_e;
    let frame = mesh.facet_frame(e)?;
    let n = frame.normal();
    let cell = mesh.boundary_facet(e).cell;
    let nodes = spaces.velocity.cell_nodes(cell);
    let nb = nodes.len();
    let geom = spaces.velocity.cell_geometry(cell);

    // matrix terms, rule exact for degree <= 2 * degree integrands
    let fq = facet_quadrature(mesh, e, 2 * degree)?;
    for q in 0..fq.n_points {
        let w = fq.weights[q];
        let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[q * dim..(q + 1) * dim]);
        geom.push_forward_gradients_only(&mut basis);

        // normal derivatives of the scalar basis
        let mut dn = vec![T::zero(); nb];
        for k in 0..nb {
            for d in 0..dim {
                dn[k] = dn[k] + basis.gradients[k * dim + d] * n[d];
            }
        }

        for a in 0..nb {
            let ga = &basis.gradients[a * dim..(a + 1) * dim];
            for b in 0..nb {
                match tag {
                    BoundaryTag::Dirichlet => {
                        for cc in 0..dim {
                            for ee in 0..dim {
                                // -2 nu (eps(u) n, v): trial (a, cc), test (b, ee)
                                let mut cons = ga[ee] * n[cc];
                                if cc == ee {
                                    cons = cons + dn[a];
                                }
                                let cons = -nu * w * cons * basis.values[b];
                                // -2 theta nu (eps(v) n, u): transposed structure
                                let gb = &basis.gradients[b * dim..(b + 1) * dim];
                                let mut adj = gb[cc] * n[ee];
                                if cc == ee {
                                    adj = adj + dn[b];
                                }
                                let adj = -theta * nu * w * adj * basis.values[a];
                                // nu gamma0 / h_E (u, v)
                                let mut entry = cons + adj;
                                if cc == ee {
                                    entry = entry + penalty * w * basis.values[a] * basis.values[b];
                                }
                                triplets.push((
                                    layout.velocity_dof(nodes[b], ee),
                                    layout.velocity_dof(nodes[a], cc),
                                    entry,
                                ));
                            }
                        }
                    }
                    BoundaryTag::Slip => {
                        for cc in 0..dim {
                            for ee in 0..dim {
                                // -2 nu (eps(u)n.n, v.n) with eps(phi_a e_c)n.n = n_c dn(phi_a)
                                let cons = -(nu + nu) * w * (n[cc] * dn[a]) * (basis.values[b] * n[ee]);
                                let adj =
                                    -theta * (nu + nu) * w * (n[ee] * dn[b]) * (basis.values[a] * n[cc]);
                                let pen =
                                    penalty * w * (basis.values[a] * n[cc]) * (basis.values[b] * n[ee]);
                                triplets.push((
                                    layout.velocity_dof(nodes[b], ee),
                                    layout.velocity_dof(nodes[a], cc),
                                    cons + adj + pen,
                                ));
                            }
                        }
                    }
                    BoundaryTag::DoNothing => unreachable!(),
                }

                // (p, v.n) and theta (q, u.n): identical on both boundary kinds
                for cc in 0..dim {
                    let t = w * basis.values[b] * basis.values[a] * n[cc];
                    triplets.push((
                        layout.velocity_dof(nodes[a], cc),
                        layout.pressure_dof(nodes[b]),
                        t,
                    ));
                    triplets.push((
                        layout.pressure_dof(nodes[b]),
                        layout.velocity_dof(nodes[a], cc),
                        theta * t,
                    ));
                }
            }
        }
    }

    // data terms, high-order rule
    let Some(case) = case else {
        return Ok(());
    };
    let fq = facet_quadrature(mesh, e, if dim == 2 { 8 } else { 6 })?;
    for q in 0..fq.n_points {
        let w = fq.weights[q];
        let x = &fq.phys_points[q * dim..(q + 1) * dim];
        let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[q * dim..(q + 1) * dim]);
        geom.push_forward_gradients_only(&mut basis);
        let mut dn = vec![T::zero(); nb];
        for k in 0..nb {
            for d in 0..dim {
                dn[k] = dn[k] + basis.gradients[k * dim + d] * n[d];
            }
        }

        match tag {
            BoundaryTag::Dirichlet => {
                let h_data = (case.dirichlet_data)(x);
                let mut h_dot_n = T::zero();
                for d in 0..dim {
                    h_dot_n = h_dot_n + h_data[d] * n[d];
                }
                for b in 0..nb {
                    let gb = &basis.gradients[b * dim..(b + 1) * dim];
                    let mut h_dot_gb = T::zero();
                    for d in 0..dim {
                        h_dot_gb = h_dot_gb + h_data[d] * gb[d];
                    }
                    for ee in 0..dim {
                        // -2 theta nu (h, eps(v) n) + nu gamma0 / h_E (h, v)
                        let cons = -theta * nu * w * (h_data[ee] * dn[b] + h_dot_gb * n[ee]);
                        let pen = penalty * w * h_data[ee] * basis.values[b];
                        let dof = layout.velocity_dof(nodes[b], ee);
                        rhs[dof] = rhs[dof] + cons + pen;
                    }
                    // theta (h.n, q)
                    let pdof = layout.pressure_dof(nodes[b]);
                    rhs[pdof] = rhs[pdof] + theta * w * h_dot_n * basis.values[b];
                }
            }
            BoundaryTag::Slip => {
                let g = (case.slip_normal_data)(x);
                let tractions: Vec<T> =
                    case.tangential_tractions.iter().map(|s| s(x)).collect();
                for b in 0..nb {
                    for ee in 0..dim {
                        // sum_i (s_i, v.t_i)
                        let mut s_term = T::zero();
                        for (i, s) in tractions.iter().enumerate() {
                            s_term = s_term + *s * frame.tangent(i)[ee];
                        }
                        // -2 theta nu (g, eps(v)n.n) + nu gamma0 / h_E (g, v.n)
                        let cons = -theta * (nu + nu) * w * g * n[ee] * dn[b];
                        let pen = penalty * w * g * basis.values[b] * n[ee];
                        let dof = layout.velocity_dof(nodes[b], ee);
                        rhs[dof] = rhs[dof] + w * s_term * basis.values[b] + cons + pen;
                    }
                    // theta (g, q)
                    let pdof = layout.pressure_dof(nodes[b]);
                    rhs[pdof] = rhs[pdof] + theta * w * g * basis.values[b];
                }
            }
            BoundaryTag::DoNothing => unreachable!(),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
