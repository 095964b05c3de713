//! Solver entry points: exact branch-and-bound, LNS and the auto mode, run
//! by one or more workers over a shared incumbent.
//!
//! Auto mode runs SetTimes branch-and-bound until it stalls, then
//! alternates slices of LNS with slices of a machine-ranking tree. That
//! tree is never restarted: each slice resumes it under the current
//! incumbent, so it finishes as an optimality proof. Every phase switch is
//! decided by counters rather than clocks, so a single-worker run is
//! reproducible for a given seed.

use std::sync::atomic::Ordering;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lns::{lns_relax, reoptimize_below};
use super::rank::RankSearch;
use super::tree::{Counters, Limits, Outcome, TreeSearch};
use super::{store_solution, Incumbent, Mode, SearchConfig, SearchStats, SharedIncumbent};
use crate::engine::{DisjunctiveRules, DomainStore, Model};
use crate::instance::{lower_bound, validate_solution, Instance, Time};

/// Fails per slice when auto mode alternates LNS and branch-and-bound.
const SLICE_FAILS: u64 = 5_000;

/// Relax-fraction multipliers cycled over portfolio workers.
const FRACTION_SPREAD: [f64; 4] = [1.0, 0.6, 1.5, 2.0];

/// Smallest horizon at which the root fixpoint does not fail. Never below
/// [`lower_bound`] and never above any feasible makespan.
pub fn root_lower_bound(inst: &Instance, rules: DisjunctiveRules) -> Time {
    let model = Model::from_instance(inst);
    let feasible = |h: Time| DomainStore::with_horizon(model.clone(), rules, h).fixpoint().is_ok();
    let mut lo = lower_bound(inst);
    let mut hi = inst.total_duration();
    if feasible(lo) {
        return lo;
    }
    // feasible(hi) holds: jobs in sequence fit in the sum of durations
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Depth-first branch-and-bound with `cfg.workers` workers.
pub fn solve_exact(inst: &Instance, cfg: &SearchConfig) -> (Incumbent, SearchStats) {
    solve(
        inst,
        &SearchConfig {
            mode: Mode::Exact,
            ..cfg.clone()
        },
    )
}

/// Runs the configured mode until the time limit or an optimality proof.
///
/// # Panics
///
/// If `cfg` fails [`SearchConfig::validate`].
pub fn solve(inst: &Instance, cfg: &SearchConfig) -> (Incumbent, SearchStats) {
    if let Err(e) = cfg.validate() {
        panic!("invalid search config: {e}");
    }
    let start = Instant::now();
    let ctx = Context {
        inst,
        model: Model::from_instance(inst),
        cfg,
        bound: root_lower_bound(inst, cfg.rules),
        deadline: start + cfg.time_limit(),
        shared: SharedIncumbent::new(start),
    };

    let totals: Vec<WorkerTotals> = if cfg.workers == 1 {
        vec![ctx.run_worker(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..cfg.workers)
                .map(|i| {
                    let ctx = &ctx;
                    scope.spawn(move || ctx.run_worker(i))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let proven = ctx.shared.proven.load(Ordering::Acquire);
    let bound = ctx.bound;
    let (best, trace) = ctx.shared.into_parts();
    let mut stats = SearchStats {
        wall_time: start.elapsed().as_secs_f64(),
        time_to_best: trace.last().map_or(0.0, |p| p.time),
        trace,
        ..SearchStats::default()
    };
    for t in &totals {
        stats.nodes += t.counters.nodes;
        stats.fails += t.counters.fails;
        stats.lns_iterations += t.lns_iterations;
    }
    let proven = proven && best.is_some();
    let bound = match (&best, proven) {
        (Some(b), true) => b.makespan,
        _ => bound,
    };
    (Incumbent { best, bound, proven }, stats)
}

#[derive(Debug, Default)]
struct WorkerTotals {
    counters: Counters,
    lns_iterations: u64,
}

struct Context<'a> {
    inst: &'a Instance,
    model: Model,
    cfg: &'a SearchConfig,
    bound: Time,
    deadline: Instant,
    shared: SharedIncumbent,
}

impl Context<'_> {
    fn limits(&self, fail_limit: Option<u64>, stall_nodes: Option<u64>) -> Limits<'_> {
        Limits {
            deadline: self.deadline,
            fail_limit,
            stall_nodes,
            stop: Some(&self.shared.stop),
        }
    }

    fn halted(&self) -> bool {
        self.shared.stop.load(Ordering::Relaxed) || Instant::now() >= self.deadline
    }

    fn prove(&self) {
        self.shared.proven.store(true, Ordering::Release);
        self.shared.stop.store(true, Ordering::Release);
    }

    fn publish(&self, sol: crate::instance::Solution) {
        debug_assert_eq!(validate_solution(self.inst, &sol), Ok(()));
        if validate_solution(self.inst, &sol).is_ok() {
            self.shared.publish(sol);
        }
    }

    /// Continues `tree` under the shared incumbent.
    fn tree_search(
        &self,
        tree: &mut TreeSearch,
        rng: &mut ChaCha8Rng,
        limits: &Limits<'_>,
        counters: &mut Counters,
    ) -> Outcome {
        let outcome = tree.run(
            rng,
            self.bound,
            limits,
            counters,
            &|| self.shared.best_makespan(),
            &mut |s, _| self.publish(store_solution(self.inst, s)),
        );
        if !outcome.is_suspended() {
            self.prove();
        }
        outcome
    }

    /// Continues the ranking tree under the shared incumbent.
    fn rank_search(&self, tree: &mut RankSearch, limits: &Limits<'_>, counters: &mut Counters) -> Outcome {
        let outcome = tree.run(
            self.bound,
            limits,
            counters,
            &|| self.shared.best_makespan(),
            &mut |s, _| self.publish(store_solution(self.inst, s)),
        );
        if !outcome.is_suspended() {
            self.prove();
        }
        outcome
    }

    fn relax_fraction(&self, worker: usize) -> f64 {
        let f = self.cfg.relax_fraction * FRACTION_SPREAD[worker % FRACTION_SPREAD.len()];
        f.min(1.0)
    }

    /// One relax-and-reoptimize step on the current incumbent.
    fn lns_step(&self, fraction: f64, rng: &mut ChaCha8Rng, counters: &mut Counters) {
        let Some(sol) = self.shared.snapshot() else { return };
        let assignment = lns_relax(self.inst, &sol, fraction, rng);
        let limits = self.limits(Some(self.cfg.lns_fail_limit), None);
        if let Some(better) = reoptimize_below(
            &self.model,
            self.inst,
            sol.makespan - 1,
            &assignment,
            self.cfg.rules,
            self.bound,
            &limits,
            rng,
            counters,
        ) {
            self.publish(better);
        }
        if self.shared.best_makespan() == Some(self.bound) {
            self.prove();
        }
    }

    fn run_worker(&self, index: usize) -> WorkerTotals {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(index as u64));
        let mut totals = WorkerTotals::default();
        let counters = &mut totals.counters;
        let fraction = self.relax_fraction(index);

        let first = match self.cfg.mode {
            Mode::Exact => self.limits(None, None),
            Mode::Lns => self.limits(None, Some(0)),
            Mode::Auto => self.limits(None, Some(self.cfg.lns_trigger_nodes)),
        };
        let mut tree = TreeSearch::new(DomainStore::new(self.model.clone(), self.cfg.rules));
        match self.tree_search(&mut tree, &mut rng, &first, counters) {
            Outcome::NodeLimit | Outcome::FailLimit => {}
            _ => return totals,
        }

        // only the first worker keeps a proof tree; the others run LNS
        let mut proof = (self.cfg.mode == Mode::Auto && index == 0)
            .then(|| RankSearch::new(DomainStore::new(self.model.clone(), self.cfg.rules)));
        let mut lns_fails = 0u64;
        while !self.halted() {
            if let Some(tree) = proof.as_mut().filter(|_| lns_fails >= SLICE_FAILS) {
                let limits = self.limits(Some(SLICE_FAILS), None);
                if self.rank_search(tree, &limits, counters) != Outcome::FailLimit {
                    break;
                }
                lns_fails = 0;
                continue;
            }
            let before = counters.fails;
            self.lns_step(fraction, &mut rng, counters);
            lns_fails += (counters.fails - before).max(1);
            totals.lns_iterations += 1;
        }
        totals
    }
}
