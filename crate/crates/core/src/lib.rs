//! Numerical laboratory for level-set mean curvature flow in the plane.
//!
//! The crate evolves a level-set function `u(x, t)` under
//! `∂_t u = |∇u| ∇·(∇u/|∇u|)` with an explicit monotone-CFL finite-difference
//! scheme, extracts the foliation of sub-level sets `Ω_s(t) = {u(·,t) < s}`
//! with marching squares, and measures how well each level evolves as a weak
//! solution: uniform perimeter bound, L² normal velocity, the distributional
//! velocity and curvature identities, Brakke's mass-dissipation inequality,
//! avoidance and comparison principles, L¹ time continuity, and level-set
//! fattening. A layer-cake reconstruction rebuilds the function from its
//! foliation and reports the sup-norm round-trip distance.
//!
//! Modules:
//! - [`field`]: grids, scalar fields, finite-difference stencils, the
//!   regularized curvature operator, and the binary snapshot format.
//! - [`solver`]: explicit time stepping and sampled viscosity-inequality
//!   spot checks.
//! - [`geometry`]: contour extraction, perimeter/area/curvature/velocity
//!   measurements on finite-perimeter sets.
//! - [`initial_data`]: well-prepared initial data (circle, paraboloid,
//!   lemniscate, two circles) and the regularized total-variation norm.
//! - [`verify`]: residual checks per level family plus report types.
//! - [`reconstruct`]: layer-cake reconstruction and field distances.

pub mod error;
pub mod field;
pub mod geometry;
pub mod initial_data;
pub mod reconstruct;
pub mod solver;
pub mod verify;

pub use error::{McfError, Result};
pub use field::{Grid2, ScalarField, SpaceTimeField};
pub use geometry::{Contour, ContourField, FinitePerimeterSet};
pub use initial_data::DatumSpec;
pub use solver::SolverParams;
pub use verify::{
    LevelFamily, LevelSeries, ReportEntry, TestFunction, Verdict, VerificationReport,
};
