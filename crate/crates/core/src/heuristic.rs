//! Swap iteration for the projection onto a simplicial cone.
//!
//! Starting from a mixed basis `{e_i : i in I} ∪ {u_j : j not in I}`, each
//! iteration expresses `x` in that basis and swaps every basis vector whose
//! coefficient is negative (`e_i <-> u_i`). Once all coefficients are
//! nonnegative the current `I` is the sector of `x` and the `alpha` part
//! gives the projection. Revisiting an index set is a loop; the run either
//! aborts or restarts from a random set.

use std::collections::HashSet;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{Membership, MixedCoefficients, SimplicialCone};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::verify::moreau_check;
use crate::DEFAULT_REL_TOL;

/// Converged coefficients must reconstruct `x` to this relative accuracy.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialSet {
    /// `I = N`: the generator basis.
    AllGenerators,
    Custom(IndexSet),
    /// Uniform over all subsets, drawn from `restart_seed`.
    Random,
}

#[derive(Debug, Clone)]
pub struct HeuristicConfig {
    /// Relative negativity threshold; a coefficient swaps when below `-sign_tol * (1 + |x|)`.
    pub sign_tol: f64,
    pub max_iterations: usize,
    pub max_restarts: usize,
    pub restart_seed: u64,
    pub initial_set: InitialSet,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            sign_tol: DEFAULT_REL_TOL,
            max_iterations: 100,
            max_restarts: 0,
            restart_seed: 0,
            initial_set: InitialSet::AllGenerators,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sign_tol >= 0.0 && self.sign_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("sign_tol must be a finite nonnegative number, got {}", self.sign_tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shortcut {
    InCone,
    InPolar,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RunStats {
    /// Decompose rounds, including the final round that certifies convergence.
    pub iterations: usize,
    pub total_changes: usize,
    pub changes_per_iteration: Vec<usize>,
    /// Iterations after the first whose swap count exceeds the previous one.
    pub increase_iterations: usize,
    pub loop_detected: bool,
    pub restarts_used: usize,
    pub shortcut: Option<Shortcut>,
}

impl RunStats {
    /// Rounds that moved at least one index; excludes the certifying round.
    pub fn swap_rounds(&self) -> usize {
        self.changes_per_iteration.iter().filter(|&&c| c > 0).count()
    }

    fn record(&mut self, swaps: usize) {
        if let Some(&prev) = self.changes_per_iteration.last() {
            if swaps > prev {
                self.increase_iterations += 1;
            }
        }
        self.iterations += 1;
        self.total_changes += swaps;
        self.changes_per_iteration.push(swaps);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    LoopAborted,
    IterationBudgetExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeuristicResult {
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub projection: DVector<f64>,
    #[serde(serialize_with = "crate::io::serialize_vector")]
    pub polar_projection: DVector<f64>,
    pub final_set: IndexSet,
    pub status: Status,
    pub stats: RunStats,
}

/// One iteration's outcome.
#[derive(Debug, Clone)]
pub struct Step {
    pub next: IndexSet,
    pub coeffs: MixedCoefficients,
    pub swaps: usize,
}

/// Decomposes `x` in the basis selected by `set` and swaps every index with a
/// coefficient below `-sign_band` (an absolute threshold).
pub fn heuristic_iterate(cone: &SimplicialCone, set: &IndexSet, x: &DVector<f64>, sign_band: f64) -> Result<Step> {
    let coeffs = cone.decompose(set, x)?;
    Ok(swap_negatives(coeffs, sign_band))
}

fn swap_negatives(coeffs: MixedCoefficients, sign_band: f64) -> Step {
    let mut next = coeffs.set.clone();
    let mut swaps = 0;
    for &(k, c) in coeffs.alpha.iter().chain(&coeffs.beta) {
        if c < -sign_band {
            next.toggle(k);
            swaps += 1;
        }
    }
    Step { next, coeffs, swaps }
}

/// Projects `x` onto `cone` with the swap iteration.
pub fn heuristic_project(cone: &SimplicialCone, x: &DVector<f64>, config: &HeuristicConfig) -> Result<HeuristicResult> {
    config.validate()?;
    cone.check_dim(x)?;
    let n = cone.dim();
    let band = config.sign_tol * (1.0 + x.norm());

    match cone.membership(x, band)? {
        Membership::InPolar | Membership::Zero => {
            return Ok(shortcut_result(n, DVector::zeros(n), x.clone(), IndexSet::empty(n), Shortcut::InPolar));
        }
        Membership::InCone => {
            return Ok(shortcut_result(n, x.clone(), DVector::zeros(n), IndexSet::full(n), Shortcut::InCone));
        }
        Membership::Outside => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.restart_seed);
    let mut current = match &config.initial_set {
        InitialSet::AllGenerators => IndexSet::full(n),
        InitialSet::Custom(set) => {
            if set.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: set.dim(),
                });
            }
            set.clone()
        }
        InitialSet::Random => random_set(n, &mut rng),
    };

    let etx = cone.generator_products(x);
    let utx = cone.polar_products(x);
    let mut stats = RunStats::default();
    let mut visited = HashSet::new();

    loop {
        visited.insert(current.clone());
        let step = swap_negatives(cone.decompose_products(&current, x, &etx, &utx)?, band);
        stats.record(step.swaps);

        if step.swaps == 0 {
            let reconstructed = step.coeffs.reconstruct(cone);
            let residual = (reconstructed - x).norm();
            if residual > RECONSTRUCTION_TOL * (1.0 + x.norm()) {
                return Err(Error::Inaccurate { residual });
            }
            return Ok(finish(cone, step.coeffs, Status::Converged, stats));
        }

        if visited.contains(&step.next) {
            stats.loop_detected = true;
            if stats.restarts_used < config.max_restarts {
                stats.restarts_used += 1;
                visited.clear();
                current = random_set(n, &mut rng);
                if stats.iterations >= config.max_iterations {
                    return Ok(finish(cone, step.coeffs, Status::IterationBudgetExhausted, stats));
                }
                continue;
            }
            return Ok(finish(cone, step.coeffs, Status::LoopAborted, stats));
        }

        if stats.iterations >= config.max_iterations {
            return Ok(finish(cone, step.coeffs, Status::IterationBudgetExhausted, stats));
        }
        current = step.next;
    }
}

/// True iff `result` converged and passes the Moreau certificate at `tol`.
pub fn certify(cone: &SimplicialCone, result: &HeuristicResult, x: &DVector<f64>, tol: f64) -> bool {
    result.status == Status::Converged
        && moreau_check(cone, x, &result.projection, tol)
            .map(|c| c.passed)
            .unwrap_or(false)
}

fn random_set(n: usize, rng: &mut ChaCha8Rng) -> IndexSet {
    IndexSet::from_indices(n, (0..n).filter(|_| rng.random::<bool>()))
}

fn shortcut_result(
    n: usize,
    projection: DVector<f64>,
    polar_projection: DVector<f64>,
    final_set: IndexSet,
    shortcut: Shortcut,
) -> HeuristicResult {
    debug_assert_eq!(final_set.dim(), n);
    HeuristicResult {
        projection,
        polar_projection,
        final_set,
        status: Status::Converged,
        stats: RunStats {
            shortcut: Some(shortcut),
            ..RunStats::default()
        },
    }
}

fn finish(cone: &SimplicialCone, coeffs: MixedCoefficients, status: Status, stats: RunStats) -> HeuristicResult {
    HeuristicResult {
        projection: cone.combine_generators(coeffs.alpha.iter().map(|&(i, a)| (i, a.max(0.0)))),
        polar_projection: cone.combine_polar(coeffs.beta.iter().map(|&(j, b)| (j, b.max(0.0)))),
        final_set: coeffs.set,
        status,
        stats,
    }
}
