//! D-optimum approximate design on finite design spaces.
//!
//! The crate implements the multiplicative weight algorithm for maximizing
//! `log det M(ξ)` over probability weights on a finite set of regressors,
//! together with screening bounds that identify points which cannot support
//! any D-optimum design. Such points are removed on the fly, which leaves
//! the iteration count essentially unchanged while making each iteration
//! much cheaper.
//!
//! Modules:
//!
//! - [`design`]: design spaces, measures, information matrices and the
//!   variance function.
//! - [`bounds`]: the screening bounds `h_m(ε)` and `h̃_m(ε)`.
//! - [`solver`]: the multiplicative algorithm with pruning and reallocation.
//! - [`instances`]: Gaussian covering-ellipse problems, worst-case
//!   instances for the bound, and ellipse extraction.
//! - [`bench`]: replicated comparison of pruning variants.
//! - [`io`]: the point CSV format.

// Argument checks are written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod bounds;
pub mod design;
pub mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod solver;

pub use bounds::{lambda1_star, lower_bound_new, lower_bound_old, prunable, BoundKind};
pub use design::{
    excess, information_matrix, log_det, smallest_relative_eigenvalue, variance_function, DesignMeasure,
    DesignPoint, DesignProblem, InfoMatrix,
};
pub use error::{DesignError, Result};
pub use instances::{covering_ellipse, gen_gaussian_ellipse, gen_tightness, EllipseParams, TightInstance};
pub use solver::{solve, solve_observed, Init, Realloc, Solution, SolverConfig, SolverState, SolverTrace, Status};
