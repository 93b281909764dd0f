//! Exhaustive sector search.
//!
//! Every `x` lies in exactly one sector `cone{e_i, u_j : i in I, j not in I}`
//! (up to boundaries). Walking all `2^n` index sets and testing the signs of
//! both Gram solves finds it; the cost is exponential, so this is meant as a
//! ground-truth oracle for small `n`.

use nalgebra::DVector;
use serde::Serialize;

use crate::cone::SimplicialCone;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

pub const DEFAULT_MAX_DIM: usize = 15;

/// Refused even when the caller raises the guard.
pub const HARD_MAX_DIM: usize = 25;

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub projection: DVector<f64>,
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub polar_projection: DVector<f64>,
    pub sector: IndexSet,
    /// Candidate sets whose generator system was solved.
    pub subsets_tried: u64,
}

/// Finds the sector of `x` by trying every `I` in increasing bit-pattern order.
///
/// Coefficients within `tol` below zero count as nonnegative and are clamped
/// to zero in the returned vectors.
pub fn exact_project(cone: &SimplicialCone, x: &DVector<f64>, tol: f64, max_dim: usize) -> Result<ExactResult> {
    check_guard(cone, max_dim)?;
    cone.check_dim(x)?;
    let n = cone.dim();
    search(cone, x, tol, (0..1u64 << n).map(move |mask| IndexSet::from_mask(n, mask)))
}

/// [`exact_project`] restricted to subsets of `{i : x^T e_i >= -tol}`.
///
/// Valid only for subdual cones: a generator with `x^T e_l < 0` cannot be in the sector.
pub fn exact_project_subdual(cone: &SimplicialCone, x: &DVector<f64>, tol: f64, max_dim: usize) -> Result<ExactResult> {
    if !cone.is_subdual() {
        return Err(Error::NotSubdual);
    }
    check_guard(cone, max_dim)?;
    cone.check_dim(x)?;
    let n = cone.dim();
    let pool = cone
        .generator_products(x)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= -tol)
        .fold(0u64, |mask, (i, _)| mask | 1 << i);
    search(cone, x, tol, submasks_ascending(pool).map(move |mask| IndexSet::from_mask(n, mask)))
}

/// Every index set whose coefficients are all `>= threshold`, in enumeration order.
///
/// With `threshold = +tol` this counts strictly feasible sectors; a generic
/// point has exactly one.
pub fn feasible_sectors(cone: &SimplicialCone, x: &DVector<f64>, threshold: f64, max_dim: usize) -> Result<Vec<IndexSet>> {
    check_guard(cone, max_dim)?;
    cone.check_dim(x)?;
    let n = cone.dim();
    let etx = cone.generator_products(x);
    let utx = cone.polar_products(x);
    let mut found = Vec::new();
    for mask in 0..1u64 << n {
        let set = IndexSet::from_mask(n, mask);
        let coeffs = cone.decompose_products(&set, x, &etx, &utx)?;
        if coeffs.min_coefficient() >= threshold {
            found.push(set);
        }
    }
    Ok(found)
}

fn check_guard(cone: &SimplicialCone, max_dim: usize) -> Result<()> {
    let guard = max_dim.min(HARD_MAX_DIM);
    if cone.dim() > guard {
        return Err(Error::DimensionGuard { n: cone.dim(), guard });
    }
    Ok(())
}

fn search(
    cone: &SimplicialCone,
    x: &DVector<f64>,
    tol: f64,
    candidates: impl Iterator<Item = IndexSet>,
) -> Result<ExactResult> {
    let etx = cone.generator_products(x);
    let utx = cone.polar_products(x);
    let mut tried = 0;
    for set in candidates {
        tried += 1;
        let coeffs = cone.decompose_products(&set, x, &etx, &utx)?;
        if coeffs.alpha.iter().any(|&(_, a)| a < -tol) {
            continue;
        }
        if coeffs.beta.iter().any(|&(_, b)| b < -tol) {
            continue;
        }
        return Ok(ExactResult {
            projection: cone.combine_generators(coeffs.alpha.iter().map(|&(i, a)| (i, a.max(0.0)))),
            polar_projection: cone.combine_polar(coeffs.beta.iter().map(|&(j, b)| (j, b.max(0.0)))),
            sector: set,
            subsets_tried: tried,
        });
    }
    Err(Error::NoSectorFound)
}

/// All submasks of `pool` in increasing numeric order, including 0 and `pool`.
fn submasks_ascending(pool: u64) -> impl Iterator<Item = u64> {
    // Counting through the complement bits forced to 1 visits submasks in order.
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == pool {
            None
        } else {
            Some(((current | !pool).wrapping_add(1)) & pool)
        };
        Some(current)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn shear() -> SimplicialCone {
        SimplicialCone::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn submasks_are_ascending_and_complete() {
        let pool = 0b1011_0100;
        let got: Vec<u64> = submasks_ascending(pool).collect();
        let want: Vec<u64> = (0..=pool).filter(|m| m & !pool == 0).collect();
        assert_eq!(got, want);
        assert_eq!(submasks_ascending(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn orthant_clamp() {
        let r = exact_project(&SimplicialCone::orthant(2), &v(&[1.0, -2.0]), 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_relative_eq!(r.projection, v(&[1.0, 0.0]), epsilon = 1e-12);
        assert_relative_eq!(r.polar_projection, v(&[0.0, -2.0]), epsilon = 1e-12);
        assert_eq!(r.sector.to_one_based(), vec![1]);
    }

    #[test]
    fn shear_example() {
        let r = exact_project(&shear(), &v(&[0.0, 1.0]), 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_relative_eq!(r.projection, v(&[0.5, 0.5]), epsilon = 1e-12);
        assert_eq!(r.sector.to_one_based(), vec![2]);
    }

    #[test]
    fn point_in_cone_projects_to_itself() {
        let cone = shear();
        let x = cone.generators().column(0) * 2.0 + cone.generators().column(1) * 3.0;
        let r = exact_project(&cone, &x, 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_relative_eq!(r.projection, x, epsilon = 1e-12);
        assert!(r.sector.is_subset(&IndexSet::full(2)) && r.sector.len() == 2);
    }

    #[test]
    fn subdual_pruning_on_orthant() {
        let orthant = SimplicialCone::orthant(3);
        let r = exact_project_subdual(&orthant, &v(&[1.0, -1.0, 2.0]), 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_relative_eq!(r.projection, v(&[1.0, 0.0, 2.0]), epsilon = 1e-12);
        assert!(r.sector.is_subset(&IndexSet::from_indices(3, [0, 2])));
        assert!(r.subsets_tried <= 4);

        let r = exact_project_subdual(&SimplicialCone::orthant(2), &v(&[-1.0, -2.0]), 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(r.subsets_tried, 1);
        assert!(r.sector.is_empty());
        assert_relative_eq!(r.projection, v(&[0.0, 0.0]));
    }

    #[test]
    fn subdual_matches_full_enumeration() {
        let cone = SimplicialCone::from_row_slice(2, &[1.0, 0.5, 0.0, 1.0]).unwrap();
        assert!(cone.is_subdual());
        let x = v(&[-2.0, -0.1]);
        let full = exact_project(&cone, &x, 1e-10, DEFAULT_MAX_DIM).unwrap();
        let pruned = exact_project_subdual(&cone, &x, 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(full.sector, pruned.sector);
        assert_relative_eq!(full.projection, pruned.projection, epsilon = 1e-12);
        assert!(pruned.subsets_tried < full.subsets_tried || full.subsets_tried == 1);
    }

    #[test]
    fn subdual_required() {
        let cone = SimplicialCone::from_row_slice(2, &[1.0, -1.0, 0.0, 0.1]).unwrap();
        assert!(matches!(
            exact_project_subdual(&cone, &v(&[1.0, 1.0]), 1e-10, DEFAULT_MAX_DIM),
            Err(Error::NotSubdual)
        ));
    }

    #[test]
    fn dimension_guard() {
        let cone = SimplicialCone::orthant(16);
        let x = DVector::from_element(16, -1.0);
        assert!(matches!(
            exact_project(&cone, &x, 1e-10, DEFAULT_MAX_DIM),
            Err(Error::DimensionGuard { n: 16, guard: 15 })
        ));
        assert!(exact_project(&cone, &x, 1e-10, 16).is_ok());
        let big = SimplicialCone::orthant(26);
        assert!(matches!(
            exact_project(&big, &DVector::zeros(26), 1e-10, 100),
            Err(Error::DimensionGuard { n: 26, guard: 25 })
        ));
    }

    #[test]
    fn impossible_tolerance_reports_no_sector() {
        // a negative tolerance demands strictly positive coefficients, which a boundary point lacks
        let r = exact_project(&SimplicialCone::orthant(2), &v(&[1.0, 0.0]), -1e-3, DEFAULT_MAX_DIM);
        assert!(matches!(r, Err(Error::NoSectorFound)));
    }

    #[test]
    fn unique_strict_sector_for_generic_point() {
        let found = feasible_sectors(&shear(), &v(&[0.0, 1.0]), 1e-10, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(found, vec![IndexSet::from_indices(2, [1])]);
    }
}
