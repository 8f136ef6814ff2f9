//! Direct quadrature evaluation of the stabilized bilinear form on
//! discrete fields, bypassing the assembled matrix.

use super::{AssemblyError, ProblemConfig};
use crate::femspace::{
    eval_ref_basis, facet_quadrature, quadrature_for, DiscreteField, FunctionSpace, RefBasis,
    Spaces,
};
use crate::mesh::BoundaryTag;
use crate::Real;

/// `(div eps(u_h))_i` of a discrete velocity field at a point with the
/// basis already pushed to physical coordinates. Identically zero for
/// degree 1.
pub fn velocity_div_eps<T: Real>(
    space: &FunctionSpace<T>,
    cell: usize,
    basis: &RefBasis<T>,
    field: &DiscreteField<T>,
) -> [T; 3] {
    let dim = basis.dim;
    let nc = space.n_components();
    let half = T::lit(0.5);
    let mut out = [T::zero(); 3];
    for (k, &node) in space.cell_nodes(cell).iter().enumerate() {
        let h = &basis.hessians[k * dim * dim..(k + 1) * dim * dim];
        let mut lap = T::zero();
        for d in 0..dim {
            lap = lap + h[d * dim + d];
        }
        for c in 0..dim {
            let coeff = field.coeffs[node * nc + c];
            for i in 0..dim {
                let mut dei = h[i * dim + c];
                if i == c {
                    dei = dei + lap;
                }
                out[i] = out[i] + coeff * half * dei;
            }
        }
    }
    out
}

/// Evaluates `B_S((u, p), (v, q))` by quadrature, without a matrix.
///
/// Agrees with `v_vec^T M u_vec` (multiplier entries zero) up to roundoff,
/// since both integrate the same polynomial integrands exactly.
pub fn bilinear_value<T: Real>(
    spaces: &Spaces<T>,
    config: &ProblemConfig<T>,
    trial: (&DiscreteField<T>, &DiscreteField<T>),
    test: (&DiscreteField<T>, &DiscreteField<T>),
) -> Result<T, AssemblyError> {
    let (u, p) = trial;
    let (v, q) = test;
    if !u.space.matches(&spaces.velocity)
        || !v.space.matches(&spaces.velocity)
        || !p.space.matches(&spaces.pressure)
        || !q.space.matches(&spaces.pressure)
    {
        return Err(AssemblyError::SpaceMismatch);
    }
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let degree = config.degree;
    let nu = config.nu;
    let theta: T = config.theta.value();
    let beta = config.beta;
    let two = T::lit(2.0);

    let rule = quadrature_for::<T>(dim, 2 * degree)?;
    let mut acc = T::zero();

    let mut grad_u = [[T::zero(); 3]; 3];
    let mut grad_v = [[T::zero(); 3]; 3];
    let mut val_u = [T::zero(); 3];
    let mut val_v = [T::zero(); 3];
    let mut val_p = [T::zero(); 1];
    let mut val_q = [T::zero(); 1];
    let mut grad_p = [[T::zero(); 3]; 3];
    let mut grad_q = [[T::zero(); 3]; 3];

    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        let detw = geom.det.abs();
        let h_k2 = mesh.cell_diameter(c) * mesh.cell_diameter(c);
        for qi in 0..rule.len() {
            let mut basis = eval_ref_basis(dim, degree, rule.point(qi));
            geom.push_forward(&mut basis);
            let w = rule.weights[qi] * detw;

            u.gradient_at(&spaces.velocity, c, &basis, &mut grad_u);
            v.gradient_at(&spaces.velocity, c, &basis, &mut grad_v);
            p.gradient_at(&spaces.pressure, c, &basis, &mut grad_p);
            q.gradient_at(&spaces.pressure, c, &basis, &mut grad_q);
            p.value_at(&spaces.pressure, c, &basis, &mut val_p);
            q.value_at(&spaces.pressure, c, &basis, &mut val_q);

            let mut eps_dot = T::zero();
            let mut div_u = T::zero();
            let mut div_v = T::zero();
            for i in 0..dim {
                div_u = div_u + grad_u[i][i];
                div_v = div_v + grad_v[i][i];
                for j in 0..dim {
                    let eu = (grad_u[i][j] + grad_u[j][i]) / two;
                    let ev = (grad_v[i][j] + grad_v[j][i]) / two;
                    eps_dot = eps_dot + eu * ev;
                }
            }

            let div_eps_u = velocity_div_eps(&spaces.velocity, c, &basis, u);
            let mut stab = T::zero();
            for i in 0..dim {
                stab = stab + (-two * nu * div_eps_u[i] + grad_p[0][i]) * grad_q[0][i];
            }

            acc = acc
                + w * (two * nu * eps_dot - div_v * val_p[0]
                    + div_u * val_q[0]
                    + beta / nu * h_k2 * stab);
        }
    }

    for e in 0..mesh.n_boundary_facets() {
        let tag = mesh.boundary_facet(e).tag;
        if tag == BoundaryTag::DoNothing {
            continue;
        }
        let frame = mesh.facet_frame(e)?;
        let n = frame.normal();
        let cell = mesh.boundary_facet(e).cell;
        let geom = spaces.velocity.cell_geometry(cell);
        let penalty = nu * config.gamma0 / mesh.facet_diameter(e);
        let fq = facet_quadrature(mesh, e, 2 * degree)?;
        for qi in 0..fq.n_points {
            let w = fq.weights[qi];
            let mut basis = eval_ref_basis(dim, degree, &fq.ref_points[qi * dim..(qi + 1) * dim]);
            geom.push_forward_gradients_only(&mut basis);

            u.value_at(&spaces.velocity, cell, &basis, &mut val_u);
            v.value_at(&spaces.velocity, cell, &basis, &mut val_v);
            u.gradient_at(&spaces.velocity, cell, &basis, &mut grad_u);
            v.gradient_at(&spaces.velocity, cell, &basis, &mut grad_v);
            p.value_at(&spaces.pressure, cell, &basis, &mut val_p);
            q.value_at(&spaces.pressure, cell, &basis, &mut val_q);

            let mut eps_u_n = [T::zero(); 3];
            let mut eps_v_n = [T::zero(); 3];
            for i in 0..dim {
                for j in 0..dim {
                    eps_u_n[i] = eps_u_n[i] + (grad_u[i][j] + grad_u[j][i]) / two * n[j];
                    eps_v_n[i] = eps_v_n[i] + (grad_v[i][j] + grad_v[j][i]) / two * n[j];
                }
            }
            let mut u_dot_n = T::zero();
            let mut v_dot_n = T::zero();
            for i in 0..dim {
                u_dot_n = u_dot_n + val_u[i] * n[i];
                v_dot_n = v_dot_n + val_v[i] * n[i];
            }

            match tag {
                BoundaryTag::Dirichlet => {
                    let mut cons = T::zero();
                    let mut adj = T::zero();
                    let mut pen = T::zero();
                    for i in 0..dim {
                        cons = cons + eps_u_n[i] * val_v[i];
                        adj = adj + eps_v_n[i] * val_u[i];
                        pen = pen + val_u[i] * val_v[i];
                    }
                    acc = acc
                        + w * (-two * nu * cons - two * theta * nu * adj + penalty * pen
                            + val_p[0] * v_dot_n
                            + theta * val_q[0] * u_dot_n);
                }
                BoundaryTag::Slip => {
                    let mut n_eps_u_n = T::zero();
                    let mut n_eps_v_n = T::zero();
                    for i in 0..dim {
                        n_eps_u_n = n_eps_u_n + n[i] * eps_u_n[i];
                        n_eps_v_n = n_eps_v_n + n[i] * eps_v_n[i];
                    }
                    acc = acc
                        + w * (-two * nu * n_eps_u_n * v_dot_n
                            - two * theta * nu * n_eps_v_n * u_dot_n
                            + penalty * u_dot_n * v_dot_n
                            + val_p[0] * v_dot_n
                            + theta * val_q[0] * u_dot_n);
                }
                BoundaryTag::DoNothing => unreachable!(),
            }
        }
    }
    Ok(acc)
}
