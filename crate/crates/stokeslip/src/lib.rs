//! Stabilized equal-order finite elements for the Stokes equations with
//! slip boundary conditions imposed weakly through Nitsche's method.
//!
//! The library solves
//!
//! ```text
//!   -div sigma(u, p) = f        in Omega,      sigma(u, p) = 2 nu eps(u) - p I,
//!            div u   = 0        in Omega,
//!            u       = h_D      on Gamma_D,
//!            u . n   = g        on Gamma_S,
//!   sigma(u,p)n . t_i = s_i     on Gamma_S,
//! ```
//!
//! with continuous Pk/Pk Lagrange elements for velocity and pressure,
//! a residual-based pressure stabilization weighted by `beta / nu`, and
//! Nitsche boundary terms (symmetric, incomplete or skew-symmetric,
//! selected by `theta` in `{1, 0, -1}`) with penalty `nu gamma0 / h_E`.
//!
//! Modules follow the pipeline: [`mesh`] (simplicial meshes, boundary tags,
//! structured generators, text I/O), [`femspace`] (Lagrange spaces and
//! quadrature), [`assembly`] (the stabilized Nitsche system), [`linsolve`]
//! (sparse direct and iterative solvers), [`analysis`] (error norms, the
//! mesh-dependent triple norm, inverse/trace constant estimation and
//! parameter selection) and [`cases`]/[`driver`] (benchmark problems and
//! the artifact-producing run layer used by the CLI).
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Real`] trait; `f64` is the working precision for production runs and
//! the concrete aliases at the crate root refer to it.

pub mod analysis;
pub mod assembly;
pub mod cases;
pub mod driver;
pub mod femspace;
pub mod linsolve;
pub mod mesh;
pub mod rng;
pub mod sparse;
pub mod vtk;

use std::fmt;

/// Scalar type for all numerical kernels: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant; panics only on values not representable
    /// at all (infinite program constants do not occur).
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("constant must be representable")
    }

    /// Widens to `f64` for reporting and formatted output.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }

    fn from_index(value: usize) -> Self {
        Self::from_usize(value).expect("index must be representable")
    }
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FloatConst
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + num_traits::NumAssign
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Double-precision aliases for the main pipeline types.
pub type Mesh64 = mesh::SimplicialMesh<f64>;
pub type Spaces64 = femspace::Spaces<f64>;
pub type Field64 = femspace::DiscreteField<f64>;
pub type Config64 = assembly::ProblemConfig<f64>;
pub type Case64 = assembly::CaseDefinition<f64>;
pub type System64 = assembly::AssembledSystem<f64>;

/// Single-precision aliases (reduced accuracy; mainly for experimentation).
pub type Mesh32 = mesh::SimplicialMesh<f32>;
pub type Spaces32 = femspace::Spaces<f32>;
pub type Field32 = femspace::DiscreteField<f32>;
pub type Config32 = assembly::ProblemConfig<f32>;
pub type Case32 = assembly::CaseDefinition<f32>;
pub type System32 = assembly::AssembledSystem<f32>;
