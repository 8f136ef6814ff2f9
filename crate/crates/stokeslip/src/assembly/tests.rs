use super::*;
use crate::femspace::{DiscreteField, Spaces};
use crate::mesh::{generate_structured_square, BoundaryTag, SimplicialMesh};
use crate::rng::SplitMix64;
use std::sync::Arc;

fn cavity_mesh(n: usize) -> Arc<SimplicialMesh<f64>> {
    Arc::new(generate_structured_square(n, (-1.0, -1.0, 1.0, 1.0), |x| {
        if x[1] < -1.0 + 1e-12 {
            BoundaryTag::Slip
        } else {
            BoundaryTag::Dirichlet
        }
    }))
}

fn config(theta: Theta, nu: f64, gamma0: f64, beta: f64, degree: usize) -> ProblemConfig<f64> {
    ProblemConfig::new(nu, theta, gamma0, beta, degree).unwrap()
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| rng.next_pm1()).collect()
}

/// The four-term expansion of `B_S(x, x)` for theta = -1, degree 1,
/// evaluated by quadrature independent of the assembled matrix.
fn quadratic_form_expansion(
    spaces: &Spaces<f64>,
    cfg: &ProblemConfig<f64>,
    u: &DiscreteField<f64>,
    p: &DiscreteField<f64>,
) -> f64 {
    use crate::femspace::{eval_ref_basis, facet_quadrature, quadrature_for};
    let mesh = spaces.mesh();
    let dim = mesh.dim();
    let rule = quadrature_for::<f64>(dim, 2 * cfg.degree).unwrap();
    let mut grad = [[0.0; 3]; 3];
    let mut value = [0.0; 3];

    let mut visc = 0.0;
    let mut stab = 0.0;
    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        let h2 = mesh.cell_diameter(c).powi(2);
        for q in 0..rule.len() {
            let mut basis = eval_ref_basis(dim, cfg.degree, rule.point(q));
            geom.push_forward_gradients_only(&mut basis);
            let w = rule.weights[q] * geom.det.abs();
            u.gradient_at(&spaces.velocity, c, &basis, &mut grad);
            let mut eps2 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let e = 0.5 * (grad[i][j] + grad[j][i]);
                    eps2 += e * e;
                }
            }
            visc += 2.0 * cfg.nu * w * eps2;
            p.gradient_at(&spaces.pressure, c, &basis, &mut grad);
            let gp2: f64 = (0..dim).map(|d| grad[0][d] * grad[0][d]).sum();
            stab += cfg.beta / cfg.nu * h2 * w * gp2;
        }
    }

    let mut penalty = 0.0;
    for e in 0..mesh.n_boundary_facets() {
        let tag = mesh.boundary_facet(e).tag;
        if tag == BoundaryTag::DoNothing {
            continue;
        }
        let frame = mesh.facet_frame(e).unwrap();
        let cell = mesh.boundary_facet(e).cell;
        let geom = spaces.velocity.cell_geometry(cell);
        let fq = facet_quadrature(mesh, e, 2 * cfg.degree).unwrap();
        let scale = cfg.nu * cfg.gamma0 / mesh.facet_diameter(e);
        for q in 0..fq.n_points {
            let mut basis = eval_ref_basis(dim, cfg.degree, &fq.ref_points[q * dim..(q + 1) * dim]);
            geom.push_forward_gradients_only(&mut basis);
            u.value_at(&spaces.velocity, cell, &basis, &mut value);
            let w = fq.weights[q];
            match tag {
                BoundaryTag::Dirichlet => {
                    let norm2: f64 = (0..dim).map(|d| value[d] * value[d]).sum();
                    penalty += scale * w * norm2;
                }
                BoundaryTag::Slip => {
                    let un: f64 = (0..dim).map(|d| value[d] * frame.normal()[d]).sum();
                    penalty += scale * w * un * un;
                }
                BoundaryTag::DoNothing => unreachable!(),
            }
        }
    }
    visc + penalty + stab
}

fn fields_from_vector<'a>(
    spaces: &Spaces<f64>,
    system: &AssembledSystem<f64>,
    x: &'a [f64],
) -> (DiscreteField<f64>, DiscreteField<f64>) {
    let u = DiscreteField::from_coeffs(&spaces.velocity, x[..system.layout.n_velocity].to_vec())
        .unwrap();
    let p = DiscreteField::from_coeffs(
        &spaces.pressure,
        x[system.layout.n_velocity..system.layout.multiplier()].to_vec(),
    )
    .unwrap();
    (u, p)
}

#[test]
fn quadratic_form_identity_skew_symmetric_p1() {
    let mesh = cavity_mesh(4);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::MinusOne, 1.0, 10.0, 0.05, 1);
    let system = assemble_matrix(&spaces, &cfg).unwrap();
    let total = system.layout.total();

    for trial in 0..100 {
        let mut x = random_vector(total, 1000 + trial);
        x[system.layout.multiplier()] = 0.0;
        let mx = system.apply_operator(&x).unwrap();
        let xtmx: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();

        let (u, p) = fields_from_vector(&spaces, &system, &x);
        let expansion = quadratic_form_expansion(&spaces, &cfg, &u, &p);
        let rel = (xtmx - expansion).abs() / expansion.abs();
        assert!(rel <= 1e-12, "trial {trial}: {xtmx} vs {expansion} (rel {rel:.2e})");
    }
}

#[test]
fn symmetric_variant_has_symmetric_velocity_block() {
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::One, 0.7, 12.0, 0.08, 1);
    let system = assemble_matrix(&spaces, &cfg).unwrap();
    let n_u = system.layout.n_velocity;
    let mut max_entry = 0.0f64;
    let mut max_asym = 0.0f64;
    for r in 0..n_u {
        let (cols, vals) = system.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            if *c < n_u {
                max_entry = max_entry.max(v.abs());
                max_asym = max_asym.max((v - system.matrix.get(*c, r)).abs());
            }
        }
    }
    assert!(max_asym <= 1e-12 * max_entry, "{max_asym:.2e} vs {max_entry:.2e}");
}

#[test]
fn skew_variant_coupling_blocks_are_negated_transposes() {
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::MinusOne, 1.3, 5.0, 0.02, 1);
    let system = assemble_matrix(&spaces, &cfg).unwrap();
    let n_u = system.layout.n_velocity;
    let mult = system.layout.multiplier();
    for r in 0..n_u {
        let (cols, vals) = system.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            if *c >= n_u && *c < mult {
                let back = system.matrix.get(*c, r);
                assert!(
                    (back + v).abs() <= 1e-14 * v.abs().max(1.0),
                    "B[{r},{c}] = {v}, C[{c},{r}] = {back}"
                );
            }
        }
    }
}

#[test]
fn viscosity_scaling_acts_per_block() {
    let mesh = cavity_mesh(2);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let base = assemble_matrix(&spaces, &config(Theta::One, 1.0, 10.0, 0.04, 1)).unwrap();
    let doubled = assemble_matrix(&spaces, &config(Theta::One, 2.0, 10.0, 0.04, 1)).unwrap();
    let n_u = base.layout.n_velocity;
    let mult = base.layout.multiplier();
    for r in 0..base.layout.total() {
        let (cols, vals) = base.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            let scaled = doubled.matrix.get(r, *c);
            let expected = if r < n_u && *c < n_u {
                2.0 * v // velocity block is affine in nu
            } else if r >= n_u && r < mult && *c >= n_u && *c < mult {
                0.5 * v // pressure-pressure stabilization carries 1/nu
            } else {
                *v // coupling blocks and constraint are nu-free
            };
            assert_eq!(scaled, expected, "entry ({r}, {c})");
        }
    }
}

#[test]
fn slip_free_mesh_ignores_slip_data() {
    let mesh = Arc::new(generate_structured_square(3, (-1.0, -1.0, 1.0, 1.0), |_| {
        BoundaryTag::Dirichlet
    }));
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::One, 1.0, 10.0, 0.05, 1);
    let zero_case = CaseDefinition::homogeneous(2);
    let mut junk_slip = CaseDefinition::homogeneous(2);
    junk_slip.slip_normal_data = Arc::new(|x: &[f64]| 17.0 + x[0]);
    junk_slip.tangential_tractions = vec![Arc::new(|x: &[f64]| -3.0 * x[1])];

    let a = assemble(&spaces, &cfg, &zero_case).unwrap();
    let b = assemble(&spaces, &cfg, &junk_slip).unwrap();
    assert_eq!(a.rhs, b.rhs);
    assert_eq!(a.matrix.nnz(), b.matrix.nnz());
    for r in 0..a.layout.total() {
        let (ca, va) = a.matrix.row(r);
        let (cb, vb) = b.matrix.row(r);
        assert_eq!(ca, cb);
        assert_eq!(va, vb);
    }
}

#[test]
fn apply_operator_matches_matrix_and_is_linear() {
    let mesh = cavity_mesh(2);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let system = assemble_matrix(&spaces, &config(Theta::Zero, 1.0, 8.0, 0.03, 1)).unwrap();
    let total = system.layout.total();

    // unit vectors extract matrix columns
    for j in [0usize, total / 2, total - 1] {
        let mut e = vec![0.0; total];
        e[j] = 1.0;
        let col = system.apply_operator(&e).unwrap();
        for (r, value) in col.iter().enumerate() {
            assert_eq!(*value, system.matrix.get(r, j));
        }
    }

    let x = random_vector(total, 5);
    let y = random_vector(total, 6);
    let ax = system.apply_operator(&x).unwrap();
    let ay = system.apply_operator(&y).unwrap();
    let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.5 * a - 0.75 * b).collect();
    let a_combo = system.apply_operator(&combo).unwrap();
    let scale = ax.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for r in 0..total {
        let lin = 2.5 * ax[r] - 0.75 * ay[r];
        assert!((a_combo[r] - lin).abs() <= 1e-13 * scale.max(1.0));
    }

    assert!(matches!(
        system.apply_operator(&x[..total - 1]),
        Err(AssemblyError::DimensionMismatch { .. })
    ));
}

#[test]
fn bilinear_value_agrees_with_matrix_quadratic_form() {
    let mesh = cavity_mesh(3);
    for degree in [1usize, 2] {
        let spaces = Spaces::equal_order(mesh.clone(), degree).unwrap();
        let cfg = config(Theta::One, 0.9, 7.0, 0.06, degree);
        let system = assemble_matrix(&spaces, &cfg).unwrap();
        let total = system.layout.total();
        for seed in 0..5 {
            let mut x = random_vector(total, 300 + seed);
            let mut y = random_vector(total, 400 + seed);
            x[system.layout.multiplier()] = 0.0;
            y[system.layout.multiplier()] = 0.0;
            let (u, p) = fields_from_vector(&spaces, &system, &x);
            let (v, q) = fields_from_vector(&spaces, &system, &y);
            let direct = bilinear_value(&spaces, &cfg, (&u, &p), (&v, &q)).unwrap();
            let mx = system.apply_operator(&x).unwrap();
            let vtmx: f64 = y.iter().zip(&mx).map(|(a, b)| a * b).sum();
            let rel = (direct - vtmx).abs() / vtmx.abs().max(1e-30);
            assert!(rel <= 1e-12, "degree {degree} seed {seed}: {direct} vs {vtmx}");
        }
    }
}

#[test]
fn bilinear_value_of_zero_fields_is_zero() {
    let mesh = cavity_mesh(2);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::MinusOne, 1.0, 10.0, 0.05, 1);
    let u = DiscreteField::zeros(&spaces.velocity);
    let p = DiscreteField::zeros(&spaces.pressure);
    assert_eq!(bilinear_value(&spaces, &cfg, (&u, &p), (&u, &p)).unwrap(), 0.0);
}

#[test]
fn skew_variant_quadratic_form_is_positive_for_degree_one() {
    // For theta = -1 and degree 1 the cross terms cancel identically, so
    // B_S(x, x) > 0 for any nonzero field and any beta > 0.
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let cfg = config(Theta::MinusOne, 1.0, 10.0, 0.05, 1);
    let system = assemble_matrix(&spaces, &cfg).unwrap();
    for seed in 0..20 {
        let mut x = random_vector(system.layout.total(), 900 + seed);
        x[system.layout.multiplier()] = 0.0;
        let (u, p) = fields_from_vector(&spaces, &system, &x);
        let value = bilinear_value(&spaces, &cfg, (&u, &p), (&u, &p)).unwrap();
        assert!(value > 0.0);
    }
}

#[test]
fn symmetric_variant_velocity_part_commutes_under_swap() {
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh.clone(), 1).unwrap();
    let cfg = config(Theta::One, 1.0, 10.0, 0.05, 1);
    let zero_p = DiscreteField::zeros(&spaces.pressure);
    for seed in 0..5 {
        let u = DiscreteField::from_coeffs(
            &spaces.velocity,
            random_vector(spaces.velocity.n_dofs(), 40 + seed),
        )
        .unwrap();
        let v = DiscreteField::from_coeffs(
            &spaces.velocity,
            random_vector(spaces.velocity.n_dofs(), 80 + seed),
        )
        .unwrap();
        let uv = bilinear_value(&spaces, &cfg, (&u, &zero_p), (&v, &zero_p)).unwrap();
        let vu = bilinear_value(&spaces, &cfg, (&v, &zero_p), (&u, &zero_p)).unwrap();
        assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
    }
}

#[test]
fn config_invariants_are_enforced() {
    assert!(ProblemConfig::new(0.0, Theta::One, 10.0, 0.1, 1).is_err());
    assert!(ProblemConfig::new(1.0, Theta::One, 0.0, 0.1, 1).is_err());
    assert!(ProblemConfig::new(1.0, Theta::One, 10.0, -0.1, 1).is_err());
    assert!(ProblemConfig::new(1.0, Theta::One, 10.0, 0.1, 3).is_err());
    assert!(ProblemConfig::new(1.0, Theta::One, 10.0, 0.1, 2).is_ok());
}

#[test]
fn split_solution_zeroes_the_pressure_mean() {
    let mesh = cavity_mesh(2);
    let spaces = Spaces::equal_order(mesh, 1).unwrap();
    let system = assemble_matrix(&spaces, &config(Theta::MinusOne, 1.0, 10.0, 0.05, 1)).unwrap();
    let x = random_vector(system.layout.total(), 77);
    let (_, pressure, _) = system.split_solution(&x).unwrap();
    let mean: f64 = system
        .pressure_integrals
        .iter()
        .zip(&pressure)
        .map(|(c, p)| c * p)
        .sum();
    assert!(mean.abs() <= 1e-13 * system.domain_volume);
}

#[test]
fn slip_penalty_override_only_touches_slip_terms() {
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh.clone(), 1).unwrap();
    let case = CaseDefinition::homogeneous(2);
    let cfg = config(Theta::MinusOne, 1.0, 10.0, 0.05, 1);

    // override equal to the config penalty reproduces plain assembly
    let plain = assemble(&spaces, &cfg, &case).unwrap();
    let same = assemble_with_slip_penalty(&spaces, &cfg, &case, 10.0).unwrap();
    for r in 0..plain.layout.total() {
        let (ca, va) = plain.matrix.row(r);
        let (cb, vb) = same.matrix.row(r);
        assert_eq!(ca, cb);
        assert_eq!(va, vb);
    }

    // a different slip penalty only moves entries between slip-facet dofs
    let bumped = assemble_with_slip_penalty(&spaces, &cfg, &case, 1000.0).unwrap();
    let mut slip_dofs = std::collections::HashSet::new();
    for e in 0..mesh.n_boundary_facets() {
        if mesh.boundary_facet(e).tag == BoundaryTag::Slip {
            for &node in spaces.velocity.facet_nodes(e) {
                for c in 0..2 {
                    slip_dofs.insert(plain.layout.velocity_dof(node, c));
                }
            }
        }
    }
    let mut changed = 0;
    for r in 0..plain.layout.total() {
        let (cols, vals) = bumped.matrix.row(r);
        for (c, v) in cols.iter().zip(vals) {
            let before = plain.matrix.get(r, *c);
            if (v - before).abs() > 1e-14 * before.abs().max(1.0) {
                assert!(
                    slip_dofs.contains(&r) && slip_dofs.contains(c),
                    "entry ({r}, {c}) changed but is not a slip-facet velocity pair"
                );
                changed += 1;
            }
        }
    }
    assert!(changed > 0);
    assert!(assemble_with_slip_penalty(&spaces, &cfg, &case, 0.0).is_err());
}

#[test]
fn stabilization_residual_vanishes_identically_for_degree_one() {
    // second derivatives of P1 are structural zeros, so -2 nu div eps(u_h)
    // must evaluate to exactly 0 for any degree-1 field
    let mesh = cavity_mesh(3);
    let spaces = Spaces::equal_order(mesh.clone(), 1).unwrap();
    let u = DiscreteField::from_coeffs(
        &spaces.velocity,
        random_vector(spaces.velocity.n_dofs(), 22),
    )
    .unwrap();
    let rule = crate::femspace::quadrature_for::<f64>(2, 2).unwrap();
    for c in 0..mesh.n_cells() {
        let geom = spaces.velocity.cell_geometry(c);
        for q in 0..rule.len() {
            let mut basis = crate::femspace::eval_ref_basis(2, 1, rule.point(q));
            geom.push_forward(&mut basis);
            let div_eps = velocity_div_eps(&spaces.velocity, c, &basis, &u);
            assert_eq!(div_eps, [0.0; 3]);
        }
    }
}
