//! Solver accuracy check: one step of iterative refinement must not move
//! solution functionals, i.e. the direct solutions are converged in the
//! metrics the studies report.

use std::sync::Arc;
use stokeslip::analysis::slip_violation;
use stokeslip::assembly::{assemble_with_slip_penalty, AssembledSystem, ProblemConfig, Theta};
use stokeslip::cases::cavity2d;
use stokeslip::femspace::{DiscreteField, Spaces};
use stokeslip::linsolve::solve_direct;
use stokeslip::mesh::{generate_structured_square, BoundaryTag};

#[test]
fn direct_solutions_are_refinement_stable() {
    let case = cavity2d::<f64>(1.0);
    for (theta, gamma0_d, gamma0_s) in [
        (Theta::MinusOne, 10.0, 1e3),
        (Theta::One, 501297.0, 1e-3),
    ] {
        let mesh = Arc::new(generate_structured_square(32, (-1.0, -1.0, 1.0, 1.0), |x: &[f64]| {
            if x[1] < -1.0 + 1e-12 {
                BoundaryTag::Slip
            } else {
                BoundaryTag::Dirichlet
            }
        }));
        let spaces = Spaces::equal_order(mesh, 1).unwrap();
        let config = ProblemConfig::new(1.0, theta, gamma0_d, 0.0069, 1).unwrap();
        let system = assemble_with_slip_penalty(&spaces, &config, &case.case, gamma0_s).unwrap();
        let solve = solve_direct(&system).unwrap();

        let violation = |x: &[f64]| -> f64 {
            let (u, _, _) = system.split_solution(x).unwrap();
            let u = DiscreteField::from_coeffs(&spaces.velocity, u).unwrap();
            slip_violation(&spaces, &u, &case.case.slip_normal_data).unwrap()
        };
        let before = violation(&solve.solution);

        let mx = system.apply_operator(&solve.solution).unwrap();
        let residual: Vec<f64> = system.rhs.iter().zip(&mx).map(|(b, a)| b - a).collect();
        let correction_system = AssembledSystem {
            matrix: system.matrix.clone(),
            rhs: residual,
            layout: system.layout,
            pressure_integrals: system.pressure_integrals.clone(),
            domain_volume: system.domain_volume,
        };
        let correction = solve_direct(&correction_system).unwrap();
        let refined: Vec<f64> = solve
            .solution
            .iter()
            .zip(&correction.solution)
            .map(|(x, d)| x + d)
            .collect();
        let after = violation(&refined);
        assert!(
            (after - before).abs() <= 1e-6 * before,
            "theta {:?}: refinement moved the slip violation {before:.9e} -> {after:.9e}",
            theta
        );
    }
}
