//! Numerical core for Dirichlet systems driven by fractional powers of the
//! Laplacian on balls, with functional weights in the equations and
//! functional boundary conditions.
//!
//! The crate discretizes the solution operator of the fractional Dirichlet
//! problem as a dense Nyström matrix built from the explicit ball kernel,
//! exposes the fixed-point map of the coupled system, finds fixed points by
//! damped Picard and finite-difference Newton iteration, and mechanically
//! checks the inequality hypotheses under which a non-zero positive
//! solution exists (or only the zero solution can exist), reporting
//! per-inequality slack.

// Constants frozen from high-precision tables keep their full digits, and
// validation guards are written `!(x > 0.0)` on purpose so that NaN fails.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

// Force the system BLAS/LAPACK into every artifact that links this crate.
use openblas_src as _;

pub mod certificates;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod green;
pub mod interval;
pub mod kernel;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use certificates::{
    bounds_from_spec, check_existence, check_nonexistence, existence_boundary_lambda,
    feasible_region_scan, nonexistence_boundary_lambda, ExistenceHypotheses, NamedConstant,
    NonexistenceHypotheses, NormSource, Outcome, Provenance, ScanMode, ScanRow, SystemBounds,
    TrackedValue, Verdict,
};
pub use error::{Error, Result};
pub use expr::ScalarExpr;
pub use geometry::{ball_volume, build_grid, BallDomain, CellGeom, GridLayout, QuadratureGrid};
pub use green::{
    apply, assemble, solve_nonhomogeneous, spectral_radius, sup_norm_g1, DiscreteGreenOperator,
    EigenPair, NonhomogeneousSolution,
};
pub use interval::Interval;
pub use kernel::{
    frac_laplacian_pointwise, green_kernel_value, normalization_constant, torsion_closed_form,
    BallGreenKernel, ExteriorData, FracOrder, QuadControl,
};
pub use model::{
    apply_t, eval_functional, nemytskii, residual, BoxBounds, ComponentSpec, FunctionalSpec,
    PointFactor, State, SystemOperators, SystemSpec,
};
pub use solver::{
    multistart_search, newton_solve, picard_solve, verify_solution, FoundSolution, Method,
    SolveReport, VerifyReport,
};
