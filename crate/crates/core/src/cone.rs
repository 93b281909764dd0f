//! Simplicial cones, their polar matrix, and mixed-basis coefficient solves.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index_set::IndexSet;

const REFINEMENT_STEPS: usize = 3;

/// Generators whose reciprocal 1-norm condition estimate falls below this are rejected.
pub const MIN_RCOND: f64 = 1e-12;

/// Default tolerance for the `e_i^T u_j = -delta_ij` construction check.
pub const DEFAULT_BUILD_TOL: f64 = 1e-8;

/// `K = cone{e_1, .., e_n}` for linearly independent `e_i` in `R^n`.
///
/// Immutable after construction, so a single cone can be shared across threads.
#[derive(Debug, Clone)]
pub struct SimplicialCone {
    generators: DMatrix<f64>,
    polar_generators: DMatrix<f64>,
    gram_e: DMatrix<f64>,
    gram_u: DMatrix<f64>,
    subdual: bool,
    rcond: f64,
}

/// Where a point sits relative to `K` and its polar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    InCone,
    InPolar,
    Outside,
    /// In both bands at once: `x` is numerically the apex.
    Zero,
}

/// Coefficients of `x = sum_{i in I} alpha_i e_i + sum_{j not in I} beta_j u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedCoefficients {
    pub set: IndexSet,
    /// `(i, alpha_i)` for `i in I`, increasing `i`.
    pub alpha: Vec<(usize, f64)>,
    /// `(j, beta_j)` for `j` in the complement, increasing `j`.
    pub beta: Vec<(usize, f64)>,
    /// A Gram factorization fell back to LU.
    pub used_fallback: bool,
}

impl MixedCoefficients {
    pub fn alpha_of(&self, i: usize) -> Option<f64> {
        self.alpha.iter().find(|&&(k, _)| k == i).map(|&(_, v)| v)
    }

    pub fn beta_of(&self, j: usize) -> Option<f64> {
        self.beta.iter().find(|&&(k, _)| k == j).map(|&(_, v)| v)
    }

    /// `sum alpha_i e_i + sum beta_j u_j`.
    pub fn reconstruct(&self, cone: &SimplicialCone) -> DVector<f64> {
        cone.combine_generators(self.alpha.iter().copied()) + cone.combine_polar(self.beta.iter().copied())
    }

    /// Smallest coefficient over both parts, `+inf` when there are none.
    pub fn min_coefficient(&self) -> f64 {
        self.alpha
            .iter()
            .chain(&self.beta)
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }
}

impl SimplicialCone {
    /// Builds the cone generated by the columns of `generators`.
    ///
    /// `tol` bounds `|e_i^T u_j + delta_ij|` relative to `1 + |e_i||u_j|`.
    pub fn new(generators: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = generators.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if generators.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("generator matrix"));
        }
        let n = rows;

        let inverse = generators
            .clone()
            .try_inverse()
            .ok_or(Error::SingularGenerators { rcond: 0.0 })?;
        let rcond = 1.0 / (one_norm(&generators) * one_norm(&inverse));
        if !rcond.is_finite() || rcond < MIN_RCOND {
            return Err(Error::SingularGenerators {
                rcond: if rcond.is_finite() { rcond } else { 0.0 },
            });
        }
        let polar_generators = -inverse.transpose();

        let cross = generators.transpose() * &polar_generators;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { -1.0 } else { 0.0 };
                let scale = 1.0 + generators.column(i).norm() * polar_generators.column(j).norm();
                if (cross[(i, j)] - target).abs() > tol * scale {
                    return Err(Error::SingularGenerators { rcond });
                }
            }
        }

        let gram_e = symmetrize(generators.transpose() * &generators);
        let gram_u = symmetrize(polar_generators.transpose() * &polar_generators);
        let subdual = gram_e.iter().all(|&v| v >= 0.0);

        Ok(Self {
            generators,
            polar_generators,
            gram_e,
            gram_u,
            subdual,
            rcond,
        })
    }

    /// Builds the cone from a row-major listing of the generator matrix.
    pub fn from_row_slice(n: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: rows.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, rows), DEFAULT_BUILD_TOL)
    }

    /// The nonnegative orthant of `R^n`.
    pub fn orthant(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), DEFAULT_BUILD_TOL).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    /// `E`, generators as columns.
    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// `U = -(E^-1)^T`, polar generators as columns.
    pub fn polar_generators(&self) -> &DMatrix<f64> {
        &self.polar_generators
    }

    pub fn gram_e(&self) -> &DMatrix<f64> {
        &self.gram_e
    }

    pub fn gram_u(&self) -> &DMatrix<f64> {
        &self.gram_u
    }

    /// All pairwise generator inner products are nonnegative.
    pub fn is_subdual(&self) -> bool {
        self.subdual
    }

    /// Reciprocal 1-norm condition number of `E`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(())
    }

    /// `E^T x`, the inner products with every generator.
    pub fn generator_products(&self, x: &DVector<f64>) -> DVector<f64> {
        self.generators.tr_mul(x)
    }

    /// `U^T x`, the inner products with every polar generator.
    pub fn polar_products(&self, x: &DVector<f64>) -> DVector<f64> {
        self.polar_generators.tr_mul(x)
    }

    pub(crate) fn combine_generators(&self, coeffs: impl IntoIterator<Item = (usize, f64)>) -> DVector<f64> {
        combine(&self.generators, coeffs)
    }

    pub(crate) fn combine_polar(&self, coeffs: impl IntoIterator<Item = (usize, f64)>) -> DVector<f64> {
        combine(&self.polar_generators, coeffs)
    }

    /// Sign-band membership: `InPolar` iff every `e_i^T x <= tol`, `InCone` iff every `u_j^T x <= tol`.
    pub fn membership(&self, x: &DVector<f64>, tol: f64) -> Result<Membership> {
        self.check_dim(x)?;
        let in_polar = self.generator_products(x).iter().all(|&v| v <= tol);
        let in_cone = self.polar_products(x).iter().all(|&v| v <= tol);
        Ok(match (in_cone, in_polar) {
            (true, true) => Membership::Zero,
            (true, false) => Membership::InCone,
            (false, true) => Membership::InPolar,
            (false, false) => Membership::Outside,
        })
    }

    /// Solves `x^T e_l = sum_{i in I} alpha_i e_i^T e_l` for `l in I`.
    pub fn solve_alpha(&self, set: &IndexSet, x: &DVector<f64>) -> Result<Vec<(usize, f64)>> {
        self.check_set(set)?;
        self.check_dim(x)?;
        Ok(self.decompose(set, x)?.alpha)
    }

    /// Solves `x^T u_k = sum_{j not in I} beta_j u_j^T u_k` for `k` in the complement of `I`.
    pub fn solve_beta(&self, set: &IndexSet, x: &DVector<f64>) -> Result<Vec<(usize, f64)>> {
        self.check_set(set)?;
        self.check_dim(x)?;
        Ok(self.decompose(set, x)?.beta)
    }

    /// Both coefficient families for the mixed basis selected by `set`.
    ///
    /// The two Gram systems decouple because `e_i^T u_j = 0` for `i in I`, `j not in I`.
    pub fn decompose(&self, set: &IndexSet, x: &DVector<f64>) -> Result<MixedCoefficients> {
        self.check_set(set)?;
        self.check_dim(x)?;
        self.decompose_products(set, x, &self.generator_products(x), &self.polar_products(x))
    }

    /// [`decompose`](Self::decompose) with `E^T x` and `U^T x` already computed.
    ///
    /// The Gram solves square the condition number of the mixed basis, so the
    /// residual `x - (E_I alpha + U_J beta)` is fed back through the same
    /// factorizations for a few refinement steps.
    pub(crate) fn decompose_products(
        &self,
        set: &IndexSet,
        x: &DVector<f64>,
        etx: &DVector<f64>,
        utx: &DVector<f64>,
    ) -> Result<MixedCoefficients> {
        let members = set.members();
        let others = set.complement_members();
        let fa = GramFactor::new(&self.gram_e, &members, Basis::Generators)?;
        let fb = GramFactor::new(&self.gram_u, &others, Basis::Polar)?;
        let mut alpha = fa.solve(&gather(etx, &members))?;
        let mut beta = fb.solve(&gather(utx, &others))?;

        let scale = 1.0 + x.norm();
        for _ in 0..REFINEMENT_STEPS {
            let recon = combine(&self.generators, members.iter().copied().zip(alpha.iter().copied()))
                + combine(&self.polar_generators, others.iter().copied().zip(beta.iter().copied()));
            let residual = x - recon;
            if residual.norm() <= f64::EPSILON * scale {
                break;
            }
            let etr = self.generators.tr_mul(&residual);
            let utr = self.polar_generators.tr_mul(&residual);
            alpha += fa.solve(&gather(&etr, &members))?;
            beta += fb.solve(&gather(&utr, &others))?;
        }

        Ok(MixedCoefficients {
            set: set.clone(),
            alpha: members.into_iter().zip(alpha.iter().copied()).collect(),
            beta: others.into_iter().zip(beta.iter().copied()).collect(),
            used_fallback: fa.is_fallback() || fb.is_fallback(),
        })
    }

    fn check_set(&self, set: &IndexSet) -> Result<()> {
        if set.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: set.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Basis {
    Generators,
    Polar,
}

impl Basis {
    fn name(self) -> &'static str {
        match self {
            Basis::Generators => "generator",
            Basis::Polar => "polar",
        }
    }
}

/// Cholesky of a principal Gram submatrix, or LU when Cholesky breaks down.
enum GramFactor {
    Empty,
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, Basis),
}

impl GramFactor {
    fn new(gram: &DMatrix<f64>, members: &[usize], basis: Basis) -> Result<Self> {
        if members.is_empty() {
            return Ok(Self::Empty);
        }
        let sub = gram.select_rows(members).select_columns(members);
        if let Some(chol) = sub.clone().cholesky() {
            return Ok(Self::Cholesky(chol));
        }
        warn!(
            "{} Gram submatrix of order {} is not numerically SPD; falling back to LU",
            basis.name(),
            members.len()
        );
        let lu = sub.lu();
        if !lu.is_invertible() {
            return Err(Error::SolveFailure { system: basis.name() });
        }
        Ok(Self::Lu(lu, basis))
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let (sol, basis) = match self {
            Self::Empty => return Ok(DVector::zeros(0)),
            Self::Cholesky(c) => (c.solve(rhs), Basis::Generators),
            Self::Lu(lu, basis) => (lu.solve(rhs).ok_or(Error::SolveFailure { system: basis.name() })?, *basis),
        };
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolveFailure { system: basis.name() });
        }
        Ok(sol)
    }

    fn is_fallback(&self) -> bool {
        matches!(self, Self::Lu(..))
    }
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&k| v[k]))
}

fn combine(columns: &DMatrix<f64>, coeffs: impl IntoIterator<Item = (usize, f64)>) -> DVector<f64> {
    let mut out = DVector::zeros(columns.nrows());
    for (k, c) in coeffs {
        out.axpy(c, &columns.column(k), 1.0);
    }
    out
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
