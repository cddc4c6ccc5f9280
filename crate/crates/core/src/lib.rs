//! C1 Petrov-Galerkin and Gauss collocation discretizations of the two-point
//! boundary value problem
//!
//! ```text
//! -(α u')' + β u' + γ u = f  on (a, b),   u(a) = u(b) = 0,
//! ```
//!
//! together with the truncated Jacobi projection of the exact solution and
//! error sampling at the superconvergence point families.

pub mod analysis;
pub mod assembly;
pub mod c1space;
pub mod error;
pub mod mesh;
pub mod orthopoly;
pub mod problems;
pub mod projection;

pub use analysis::{
    convergence_rates, fitted_order, h2_norm_diff, sample_errors, sup_diff, ErrorKind, ErrorReport, RateFlag, RateRow,
    RateTable,
};
pub use assembly::{solve_problem, Coefficients, LinearSystem, Method, Problem, Solution};
pub use c1space::{C1Function, DofKind, DofLayout, Side, SpaceConfig};
pub use error::{Error, Result};
pub use mesh::{build_mesh, Mesh1D, MeshSpec};
pub use orthopoly::{JacobiIndex, QuadratureRule};
pub use problems::{lookup, registry, ConstantCoefficients, PROBLEM_IDS};
pub use projection::{truncated_projection, SmoothFunction};
