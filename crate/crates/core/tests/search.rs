mod common;

use common::{classic, small_instance};
use jobshop::harness::brute_force_optimum;
use jobshop::search::{lns_relax, reoptimize, root_lower_bound, solve, solve_exact, Mode, SearchConfig};
use jobshop::{lower_bound, validate_solution, DisjunctiveRules};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn exact_matches_the_oracle(inst in small_instance(3, 3, 3, 9)) {
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        let (inc, _) = solve_exact(&inst, &SearchConfig::default());
        prop_assert!(inc.proven);
        prop_assert_eq!(inc.makespan(), Some(opt));
        prop_assert_eq!(inc.bound, opt);
        prop_assert_eq!(validate_solution(&inst, inc.best.as_ref().unwrap()), Ok(()));
    }

    #[test]
    fn auto_matches_the_oracle(inst in small_instance(3, 3, 3, 9), seed in 0..100u64) {
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        let cfg = SearchConfig { seed, ..SearchConfig::default() };
        let (inc, _) = solve(&inst, &cfg);
        prop_assert!(inc.proven);
        prop_assert_eq!(inc.makespan(), Some(opt));
    }

    #[test]
    fn root_bound_is_valid(inst in small_instance(3, 3, 3, 9)) {
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        let lb = root_lower_bound(&inst, DisjunctiveRules::ALL);
        prop_assert!(lower_bound(&inst) <= lb && lb <= opt);
    }

    #[test]
    fn reoptimize_never_worsens(inst in small_instance(3, 3, 3, 9), f in 0.0..=1.0f64, seed in 0..1000u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (incumbent, _) = solve(&inst, &SearchConfig { mode: Mode::Lns, time_limit: 0.05, ..SearchConfig::default() });
        let sol = incumbent.best.unwrap();
        let assignment = lns_relax(&inst, &sol, f, &mut rng);
        prop_assert_eq!(assignment.num_frozen() + assignment.num_released(), inst.num_ops());
        if let Some(better) = reoptimize(&inst, &sol, &assignment, DisjunctiveRules::ALL, 200, seed, false) {
            prop_assert!(better.makespan <= sol.makespan);
            prop_assert_eq!(validate_solution(&inst, &better), Ok(()));
        }
    }
}

#[test]
fn ft06_is_proven_in_every_complete_mode() {
    let inst = classic("ft06");
    for mode in [Mode::Exact, Mode::Auto] {
        let (inc, stats) = solve(
            &inst,
            &SearchConfig {
                mode,
                ..SearchConfig::default()
            },
        );
        assert!(inc.proven, "{mode}");
        assert_eq!(inc.makespan(), Some(55), "{mode}");
        assert!(stats.nodes > 0);
        assert!(stats.time_to_best <= stats.wall_time);
    }
}

#[test]
fn lns_mode_improves_a_first_solution() {
    let inst = classic("la02");
    let cfg = SearchConfig {
        mode: Mode::Lns,
        time_limit: 2.0,
        ..SearchConfig::default()
    };
    let (inc, stats) = solve(&inst, &cfg);
    let best = inc.best.unwrap();
    assert_eq!(validate_solution(&inst, &best), Ok(()));
    assert!(stats.lns_iterations > 0);
    assert!(best.makespan >= 655);
    assert!(stats.trace.windows(2).all(|w| w[0].makespan > w[1].makespan));
    assert_eq!(stats.trace.last().unwrap().makespan, best.makespan);
}

#[test]
fn single_worker_runs_repeat_exactly() {
    let inst = classic("la01");
    let cfg = SearchConfig::default();
    let (a, sa) = solve(&inst, &cfg);
    let (b, sb) = solve(&inst, &cfg);
    assert_eq!(a.best, b.best);
    assert_eq!(
        (sa.nodes, sa.fails, sa.lns_iterations),
        (sb.nodes, sb.fails, sb.lns_iterations)
    );
}

#[test]
fn portfolio_finds_the_same_optimum() {
    let inst = classic("la03");
    let cfg = SearchConfig {
        workers: 3,
        time_limit: 120.0,
        ..SearchConfig::default()
    };
    let (inc, stats) = solve(&inst, &cfg);
    assert!(inc.proven);
    assert_eq!(inc.makespan(), Some(597));
    assert_eq!(validate_solution(&inst, inc.best.as_ref().unwrap()), Ok(()));
    assert!(stats.trace.windows(2).all(|w| w[0].makespan > w[1].makespan));
}

#[test]
fn time_limit_is_respected() {
    let inst = classic("la21");
    let cfg = SearchConfig {
        time_limit: 0.5,
        ..SearchConfig::default()
    };
    let (inc, stats) = solve(&inst, &cfg);
    assert!(stats.wall_time < 1.5, "took {}", stats.wall_time);
    let best = inc.best.expect("a first solution within half a second");
    assert_eq!(validate_solution(&inst, &best), Ok(()));
    assert!(inc.bound <= best.makespan);
}

#[test]
#[should_panic(expected = "invalid search config")]
fn invalid_config_panics() {
    let inst = classic("ft06");
    solve(
        &inst,
        &SearchConfig {
            workers: 0,
            ..SearchConfig::default()
        },
    );
}
