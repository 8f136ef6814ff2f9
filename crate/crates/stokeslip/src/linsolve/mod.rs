//! Linear solvers for the assembled saddle-point systems.
//!
//! The production path is the sparse direct solver; GMRES exists for large
//! 3D smoke runs. Reported residuals are always recomputed from the
//! returned solution, never trusted from solver internals.

mod gmres;
mod lu;
mod ordering;

pub use lu::LuError;
pub use ordering::fill_reducing_ordering;

use crate::assembly::AssembledSystem;
use crate::Real;
use std::time::Instant;
use thiserror::Error;

/// Refuse direct factorizations beyond this dimension; the iterative path
/// serves anything larger.
pub const MAX_DIRECT_DIM: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lu(#[from] LuError),
    #[error("system dimension {dim} exceeds the direct-solver guard ({max}); use solve_iterative")]
    TooLarge { dim: usize, max: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub solution: Vec<T>,
    /// `||M x - b||_2 / ||b||_2`, recomputed from `solution`.
    pub rel_residual: T,
    pub method: &'static str,
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
}

/// Sparse LU with nested-dissection ordering and partial pivoting.
/// Deterministic: identical inputs give bitwise-identical solutions.
pub fn solve_direct<T: Real>(system: &AssembledSystem<T>) -> Result<SolveReport<T>, SolveError> {
    let start = Instant::now();
    let dim = system.layout.total();
    if dim > MAX_DIRECT_DIM {
        return Err(SolveError::TooLarge {
            dim,
            max: MAX_DIRECT_DIM,
        });
    }
    let b = &system.rhs;
    if b.iter().all(|v| *v == T::zero()) {
        return Ok(SolveReport {
            solution: vec![T::zero(); dim],
            rel_residual: T::zero(),
            method: "sparse-lu",
            iterations: 0,
            converged: true,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    let order = fill_reducing_ordering(&system.matrix);
    let lu = lu::SparseLu::factor(&system.matrix, order)?;
    let solution = lu.solve(b);
    let rel_residual = system
        .matrix
        .relative_residual(&solution, b)
        .expect("dimensions match");
    Ok(SolveReport {
        solution,
        rel_residual,
        method: "sparse-lu",
        iterations: 0,
        converged: true,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Restarted GMRES with Jacobi preconditioning. Non-convergence is reported
/// through the `converged` flag, not as an error.
pub fn solve_iterative<T: Real>(
    system: &AssembledSystem<T>,
    tol: T,
    max_iter: usize,
) -> Result<SolveReport<T>, SolveError> {
    let start = Instant::now();
    if !(tol > T::zero()) {
        return Err(SolveError::BadTolerance(tol.as_f64()));
    }
    let outcome = gmres::gmres(&system.matrix, &system.rhs, tol, max_iter, 200);
    let rel_residual = system
        .matrix
        .relative_residual(&outcome.solution, &system.rhs)
        .expect("dimensions match");
    Ok(SolveReport {
        solution: outcome.solution,
        rel_residual,
        method: "gmres-jacobi",
        iterations: outcome.iterations,
        converged: outcome.converged,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
