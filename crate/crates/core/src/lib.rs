//! Metric projection onto simplicial cones.
//!
//! A simplicial cone `K = {Ev : v >= 0}` is generated by the columns of an
//! invertible `n x n` matrix `E`. Its polar is generated by the columns of
//! `U = -(E^-1)^T`, and for every index set `I` the vectors
//! `{e_i : i in I} ∪ {u_j : j not in I}` form a basis of `R^n`. Exactly one
//! such mixed basis expresses a point `x` with nonnegative coefficients, and
//! that representation yields the projection of `x` onto `K`.
//!
//! The crate provides:
//! - [`cone`]: cone construction, polar matrix, membership and mixed-basis solves,
//! - [`exact`]: the exhaustive sector search (exponential, small `n` only),
//! - [`heuristic`]: the swap iteration that usually finds the sector in a handful of rounds,
//! - [`verify`]: Moreau certificates and sector classification,
//! - [`experiment`]: a seeded Monte-Carlo harness with CSV output,
//! - [`cli`]: the `simcone` command-line front end.

pub mod cli;
pub mod cone;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod heuristic;
pub mod index_set;
pub mod io;
pub mod verify;

pub use cone::{Membership, MixedCoefficients, SimplicialCone};
pub use error::{Error, Result};
pub use exact::{exact_project, exact_project_subdual, ExactResult};
pub use heuristic::{certify, heuristic_project, HeuristicConfig, HeuristicResult, RunStats, Status};
pub use index_set::IndexSet;
pub use verify::{classify_sector, moreau_check, Certificate};

/// Relative tolerance used for sign tests and membership when none is given.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Absolute sign band for a point: `rel * (1 + |x|)`.
pub fn scaled_tol(rel: f64, x: &nalgebra::DVector<f64>) -> f64 {
    rel * (1.0 + x.norm())
}
