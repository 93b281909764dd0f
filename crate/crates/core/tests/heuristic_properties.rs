mod common;

use common::{brute_force_projection, normal_vector, random_cone, rng};
use nalgebra::DVector;
use proptest::prelude::*;
use simplicial_cone::experiment::{run_trial_result, sample_instance, ExperimentConfig};
use simplicial_cone::heuristic::{heuristic_iterate, InitialSet, Status};
use simplicial_cone::{certify, exact_project, heuristic_project, HeuristicConfig, IndexSet, RunStats, SimplicialCone};

fn check_stats(stats: &RunStats) {
    assert_eq!(stats.total_changes, stats.changes_per_iteration.iter().sum::<usize>());
    assert_eq!(stats.iterations, stats.changes_per_iteration.len());
    assert!(stats.increase_iterations <= stats.iterations.saturating_sub(1));
    if stats.shortcut.is_some() {
        assert_eq!(stats.iterations, 0);
        assert_eq!(stats.total_changes, 0);
    }
}

/// Index sets visited by the plain iteration from `I = N` at absolute band `band`.
fn trace(cone: &SimplicialCone, x: &DVector<f64>, band: f64) -> Vec<IndexSet> {
    let mut set = IndexSet::full(cone.dim());
    let mut path = vec![set.clone()];
    for _ in 0..50 {
        let step = heuristic_iterate(cone, &set, x, band).unwrap();
        if step.swaps == 0 || path.contains(&step.next) {
            break;
        }
        set = step.next;
        path.push(set.clone());
    }
    path
}

/// The first looping trial of a default experiment at size `n`.
fn looping_trial(n: usize) -> (ExperimentConfig, u64) {
    let config = ExperimentConfig::default();
    for t in 0..5000 {
        if run_trial_result(n, t, &config).unwrap().status == Status::LoopAborted {
            return (config, t);
        }
    }
    panic!("no looping trial found at n = {n}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn converged_results_are_exact(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let cone = random_cone(&mut r, n);
        let x = normal_vector(&mut r, n);
        let res = heuristic_project(&cone, &x, &HeuristicConfig::default()).unwrap();
        check_stats(&res.stats);
        if res.status == Status::Converged {
            let band = 1e-7 * (1.0 + x.norm());
            prop_assert!(certify(&cone, &res, &x, band));
            let exact = exact_project(&cone, &x, 1e-10 * (1.0 + x.norm()), 15).unwrap();
            prop_assert!((&res.projection - &exact.projection).norm() <= band);
            let oracle = brute_force_projection(cone.generators(), &x, 1e-9);
            prop_assert!((&res.projection - &oracle).norm() <= band);
        }
    }

    #[test]
    fn deterministic(seed in any::<u64>(), n in 1usize..=12, restarts in 0usize..3) {
        let mut r = rng(seed);
        let cone = random_cone(&mut r, n);
        let x = normal_vector(&mut r, n);
        let cfg = HeuristicConfig { max_restarts: restarts, restart_seed: seed, ..HeuristicConfig::default() };
        let a = heuristic_project(&cone, &x, &cfg).unwrap();
        let b = heuristic_project(&cone, &x, &cfg).unwrap();
        prop_assert_eq!(a.stats, b.stats);
        prop_assert_eq!(a.final_set, b.final_set);
        prop_assert_eq!(a.projection, b.projection);
        prop_assert_eq!(a.status, b.status);
    }

    #[test]
    fn path_is_scale_invariant(seed in any::<u64>(), n in 1usize..=10, t in 0.01f64..100.0) {
        let mut r = rng(seed);
        let cone = random_cone(&mut r, n);
        let x = normal_vector(&mut r, n);
        let xt = &x * t;
        prop_assert_eq!(trace(&cone, &x, 1e-10), trace(&cone, &xt, 1e-10 * t));
        let a = heuristic_project(&cone, &x, &HeuristicConfig::default()).unwrap();
        let b = heuristic_project(&cone, &xt, &HeuristicConfig::default()).unwrap();
        prop_assert_eq!(&a.stats, &b.stats);
        prop_assert_eq!(&a.final_set, &b.final_set);
        prop_assert!((&b.projection - &a.projection * t).norm() <= 1e-8 * (1.0 + t * a.projection.norm()));
    }

    #[test]
    fn random_start_also_finds_the_projection(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let cone = random_cone(&mut r, n);
        let x = normal_vector(&mut r, n);
        let cfg = HeuristicConfig { initial_set: InitialSet::Random, restart_seed: seed, max_restarts: 5, ..HeuristicConfig::default() };
        let res = heuristic_project(&cone, &x, &cfg).unwrap();
        check_stats(&res.stats);
        if res.status == Status::Converged {
            prop_assert!(certify(&cone, &res, &x, 1e-7 * (1.0 + x.norm())));
        }
    }
}

#[test]
fn loop_abort_is_sound() {
    for n in [3, 5] {
        let (config, t) = looping_trial(n);
        let (cone, x) = sample_instance(n, t, &config).unwrap();
        let res = heuristic_project(&cone, &x, &config.heuristic).unwrap();
        assert_eq!(res.status, Status::LoopAborted);
        assert!(res.stats.loop_detected);
        check_stats(&res.stats);

        // replay the iteration: the set the last round would move to was already visited
        let band = config.heuristic.sign_tol * (1.0 + x.norm());
        let mut set = IndexSet::full(n);
        let mut seen = vec![];
        for _ in 0..res.stats.iterations {
            seen.push(set.clone());
            let step = heuristic_iterate(&cone, &set, &x, band).unwrap();
            assert!(step.swaps > 0);
            set = step.next;
        }
        assert!(seen.contains(&set), "abort without a revisit");
        assert_eq!(seen.last(), Some(&res.final_set));
    }
}

#[test]
fn restarts_recover_from_loops() {
    let (config, t) = looping_trial(3);
    let (cone, x) = sample_instance(3, t, &config).unwrap();
    let cfg = HeuristicConfig {
        max_restarts: 10,
        restart_seed: 1,
        ..config.heuristic.clone()
    };
    let res = heuristic_project(&cone, &x, &cfg).unwrap();
    check_stats(&res.stats);
    assert!(res.stats.restarts_used >= 1);
    assert!(res.stats.loop_detected);
    assert_eq!(res.status, Status::Converged);
    assert!(certify(&cone, &res, &x, 1e-7 * (1.0 + x.norm())));
    let exact = exact_project(&cone, &x, 1e-10 * (1.0 + x.norm()), 15).unwrap();
    assert!((&res.projection - &exact.projection).norm() <= 1e-7 * (1.0 + x.norm()));
}

#[test]
fn shortcut_stats() {
    let mut r = rng(5);
    let cone = random_cone(&mut r, 4);
    let w = normal_vector(&mut r, 4).abs();
    let inside = cone.generators() * &w;
    let res = heuristic_project(&cone, &inside, &HeuristicConfig::default()).unwrap();
    assert_eq!(res.projection, inside);
    check_stats(&res.stats);
    assert!(res.stats.shortcut.is_some());
    let polar = cone.polar_generators() * &w;
    let res = heuristic_project(&cone, &polar, &HeuristicConfig::default()).unwrap();
    assert_eq!(res.projection, DVector::zeros(4));
    assert!(res.stats.shortcut.is_some());
    check_stats(&res.stats);
}
