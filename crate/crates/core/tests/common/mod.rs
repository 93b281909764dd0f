#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use simplicial_cone::SimplicialCone;

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

pub fn shear() -> SimplicialCone {
    SimplicialCone::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// A random cone whose generators are not too close to dependent.
pub fn random_cone(rng: &mut ChaCha8Rng, n: usize) -> SimplicialCone {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        if let Ok(cone) = SimplicialCone::new(m, 1e-8) {
            if cone.rcond() > 1e-6 {
                return cone;
            }
        }
    }
}

/// A random cone with all pairwise generator inner products nonnegative.
pub fn random_subdual_cone(rng: &mut ChaCha8Rng, n: usize) -> SimplicialCone {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
        if let Ok(cone) = SimplicialCone::new(m, 1e-8) {
            if cone.rcond() > 1e-6 {
                assert!(cone.is_subdual());
                return cone;
            }
        }
    }
}

/// Brute-force projection that never touches the polar matrix.
///
/// For every generator subset S, project x onto span{e_i : i in S} by least
/// squares (Householder QR). Keep candidates whose coefficients are
/// nonnegative and whose residual has nonpositive inner product with every
/// generator; return the closest. Exponential, test use only.
pub fn brute_force_projection(e: &DMatrix<f64>, x: &DVector<f64>, tol: f64) -> DVector<f64> {
    let n = e.ncols();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u64..1 << n {
        let cols: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let (p, coeffs) = if cols.is_empty() {
            (DVector::zeros(n), DVector::zeros(0))
        } else {
            let sub = e.select_columns(&cols);
            let qr = sub.clone().qr();
            let qtx = qr.q().transpose() * x;
            let coeffs = qr.r().solve_upper_triangular(&qtx).expect("independent columns");
            (sub * &coeffs, coeffs)
        };
        if coeffs.iter().any(|&c| c < -tol) {
            continue;
        }
        let residual = x - &p;
        if e.tr_mul(&residual).iter().any(|&g| g > tol) {
            continue;
        }
        let dist = residual.norm();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, p));
        }
    }
    best.expect("some sector always contains x").1
}
