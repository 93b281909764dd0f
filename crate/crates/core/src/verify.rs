//! Moreau-decomposition certificates and sector classification.

use nalgebra::DVector;
use serde::Serialize;

use crate::cone::SimplicialCone;
use crate::error::{Error, Result};
use crate::exact::exact_project;
use crate::index_set::IndexSet;

/// Residuals of `x = p + (x - p)` as a Moreau decomposition with `p in K`, `x - p in K°`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// `max_j u_j^T p`; nonpositive iff `p in K`.
    pub cone_residual: f64,
    /// `max_i e_i^T (x - p)`; nonpositive iff `x - p in K°`.
    pub polar_residual: f64,
    /// `|p^T (x - p)|`.
    pub orthogonality_residual: f64,
    pub passed: bool,
}

/// Checks whether `p` is the projection of `x` onto `cone`.
///
/// Passes when both membership residuals are `<= tol` and the orthogonality
/// residual is `<= tol * (1 + |x|^2)`.
pub fn moreau_check(cone: &SimplicialCone, x: &DVector<f64>, p: &DVector<f64>, tol: f64) -> Result<Certificate> {
    cone.check_dim(x)?;
    if p.len() != cone.dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.dim(),
            found: p.len(),
        });
    }
    let rest = x - p;
    let cone_residual = cone.polar_products(p).max();
    let polar_residual = cone.generator_products(&rest).max();
    let orthogonality_residual = p.dot(&rest).abs();
    let passed = cone_residual <= tol
        && polar_residual <= tol
        && orthogonality_residual <= tol * (1.0 + x.norm_squared());
    Ok(Certificate {
        cone_residual,
        polar_residual,
        orthogonality_residual,
        passed,
    })
}

/// The index set `I` whose sector `cone{e_i, u_j : i in I, j not in I}` contains `x`.
pub fn classify_sector(cone: &SimplicialCone, x: &DVector<f64>, tol: f64, max_dim: usize) -> Result<IndexSet> {
    exact_project(cone, x, tol, max_dim).map(|r| r.sector)
}
