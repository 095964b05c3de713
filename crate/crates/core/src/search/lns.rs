//! Neighbourhoods for large neighbourhood search and the re-optimization of
//! a relaxed incumbent.
//!
//! A relaxation freezes most operations at their incumbent start times. The
//! re-optimization keeps the machine order among frozen operations and lets
//! the engine re-time everything, so the incumbent itself always remains a
//! solution of the sub-problem.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::store_solution;
use super::tree::{Counters, Limits, TreeSearch};
use crate::engine::{DisjunctiveRules, DomainStore, Model};
use crate::instance::{Instance, Solution, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    /// Uniformly random operations.
    RandomOps,
    /// Operations starting in a random time window.
    TimeWindow,
    /// All operations of a random subset of machines.
    Machines,
}

impl Neighborhood {
    pub const ALL: [Neighborhood; 3] = [
        Neighborhood::RandomOps,
        Neighborhood::TimeWindow,
        Neighborhood::Machines,
    ];
}

/// Frozen start times per `(job, op)`; `None` marks a released operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    pub neighborhood: Neighborhood,
    pub frozen: Vec<Vec<Option<Time>>>,
}

impl PartialAssignment {
    pub fn num_frozen(&self) -> usize {
        self.frozen.iter().flatten().filter(|s| s.is_some()).count()
    }

    pub fn num_released(&self) -> usize {
        self.frozen.iter().flatten().filter(|s| s.is_none()).count()
    }
}

/// Releases about `relax_fraction` of the operations of `sol`, picking one
/// of the three neighbourhoods uniformly at random.
pub fn lns_relax<R: Rng>(inst: &Instance, sol: &Solution, relax_fraction: f64, rng: &mut R) -> PartialAssignment {
    let neighborhood = *Neighborhood::ALL.choose(rng).unwrap();
    relax_with(inst, sol, relax_fraction, neighborhood, rng)
}

pub(crate) fn relax_with<R: Rng>(
    inst: &Instance,
    sol: &Solution,
    relax_fraction: f64,
    neighborhood: Neighborhood,
    rng: &mut R,
) -> PartialAssignment {
    let ops: Vec<(usize, usize)> = inst.operations().map(|(j, k, _)| (j, k)).collect();
    let n = ops.len();
    let target = ((relax_fraction * n as f64).round() as usize).min(n);
    let mut released = vec![false; n];
    let flat = |j: usize, k: usize, inst: &Instance| inst.jobs[..j].iter().map(|job| job.len()).sum::<usize>() + k;

    if target > 0 {
        match neighborhood {
            Neighborhood::RandomOps => {
                for i in rand::seq::index::sample(rng, n, target) {
                    released[i] = true;
                }
            }
            Neighborhood::TimeWindow => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&i| (sol.starts[ops[i].0][ops[i].1], i));
                let offset = rng.gen_range(0..=n - target);
                for &i in &order[offset..offset + target] {
                    released[i] = true;
                }
            }
            Neighborhood::Machines => {
                let mut machines: Vec<usize> = (0..inst.num_machines).collect();
                machines.shuffle(rng);
                let mut by_machine: Vec<Vec<usize>> = vec![Vec::new(); inst.num_machines];
                for (i, &(j, k)) in ops.iter().enumerate() {
                    by_machine[inst.jobs[j].ops[k].machine].push(i);
                }
                let mut count = 0;
                for m in machines {
                    if count >= target {
                        break;
                    }
                    for &i in &by_machine[m] {
                        released[i] = true;
                    }
                    count += by_machine[m].len();
                }
            }
        }
    }

    let frozen = inst
        .jobs
        .iter()
        .enumerate()
        .map(|(j, job)| {
            (0..job.len())
                .map(|k| (!released[flat(j, k, inst)]).then_some(sol.starts[j][k]))
                .collect()
        })
        .collect();
    PartialAssignment { neighborhood, frozen }
}

/// The instance model plus, per machine, a chain through its frozen
/// operations in incumbent order.
pub(crate) fn frozen_model(base: &Model, assignment: &PartialAssignment) -> Model {
    let mut per_machine: Vec<Vec<(Time, usize)>> = vec![Vec::new(); base.num_machines()];
    for (j, starts) in assignment.frozen.iter().enumerate() {
        for (k, s) in starts.iter().enumerate() {
            if let Some(s) = s {
                let op = base.op_id(j, k);
                per_machine[base.machine(op)].push((*s, op));
            }
        }
    }
    let mut model = base.clone();
    model.add_chains(per_machine.into_iter().filter(|v| v.len() > 1).map(|mut v| {
        v.sort_unstable();
        v.into_iter().map(|(_, op)| op).collect()
    }));
    model
}

/// Searches the relaxed sub-problem for a schedule with makespan at most
/// `sol.makespan` (strictly below it when `strict`), within `fail_limit`
/// fails. Returns the best schedule found.
pub fn reoptimize(
    inst: &Instance,
    sol: &Solution,
    assignment: &PartialAssignment,
    rules: DisjunctiveRules,
    fail_limit: u64,
    seed: u64,
    strict: bool,
) -> Option<Solution> {
    let horizon = if strict { sol.makespan - 1 } else { sol.makespan };
    let limits = Limits {
        deadline: Instant::now() + Duration::from_secs(24 * 3600),
        fail_limit: Some(fail_limit),
        stall_nodes: None,
        stop: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = Model::from_instance(inst);
    reoptimize_below(
        &base,
        inst,
        horizon,
        assignment,
        rules,
        0,
        &limits,
        &mut rng,
        &mut Counters::default(),
    )
}

/// Tree search over the frozen sub-problem with every op ending by
/// `horizon`. Stops early at a schedule of makespan `target` or less.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reoptimize_below(
    base: &Model,
    inst: &Instance,
    horizon: Time,
    assignment: &PartialAssignment,
    rules: DisjunctiveRules,
    target: Time,
    limits: &Limits<'_>,
    rng: &mut ChaCha8Rng,
    counters: &mut Counters,
) -> Option<Solution> {
    let store = DomainStore::with_horizon(frozen_model(base, assignment), rules, horizon);
    if store.is_failed() {
        counters.fails += 1;
        return None;
    }
    let mut best = None;
    TreeSearch::new(store).run(rng, target, limits, counters, &|| None, &mut |s, _| {
        best = Some(store_solution(inst, s))
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::harness::brute_force_optimum;
    use crate::instance::validate_solution;

    fn fixture() -> (Instance, Solution) {
        let inst = parse_instance("3 3\n0 3 1 2 2 2\n1 4 0 1 2 3\n2 2 1 3 0 2").unwrap();
        // a valid but poor schedule: jobs one after the other
        let mut t = 0;
        let starts = inst
            .jobs
            .iter()
            .map(|job| {
                job.ops
                    .iter()
                    .map(|op| {
                        let s = t;
                        t += op.duration;
                        s
                    })
                    .collect()
            })
            .collect();
        let sol = Solution::from_starts(&inst, starts);
        (inst, sol)
    }

    #[test]
    fn fraction_extremes() {
        let (inst, sol) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for nb in Neighborhood::ALL {
            let all = relax_with(&inst, &sol, 0.0, nb, &mut rng);
            assert_eq!(all.num_released(), 0);
            let none = relax_with(&inst, &sol, 1.0, nb, &mut rng);
            assert_eq!(none.num_frozen(), 0);
        }
    }

    #[test]
    fn released_count_tracks_fraction() {
        let (inst, sol) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for nb in [Neighborhood::RandomOps, Neighborhood::TimeWindow] {
            assert_eq!(relax_with(&inst, &sol, 1.0 / 3.0, nb, &mut rng).num_released(), 3);
        }
        let m = relax_with(&inst, &sol, 1.0 / 3.0, Neighborhood::Machines, &mut rng);
        assert_eq!(m.num_released(), 3);
    }

    #[test]
    fn reoptimization_never_worsens() {
        let (inst, sol) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fraction in [0.0, 0.2, 0.5, 1.0] {
            let a = lns_relax(&inst, &sol, fraction, &mut rng);
            let better = reoptimize(&inst, &sol, &a, DisjunctiveRules::ALL, 1000, 1, false).unwrap();
            assert_eq!(validate_solution(&inst, &better), Ok(()));
            assert!(better.makespan <= sol.makespan);
        }
        // with everything released the sub-problem is the full problem
        let a = relax_with(&inst, &sol, 1.0, Neighborhood::RandomOps, &mut rng);
        let best = reoptimize(&inst, &sol, &a, DisjunctiveRules::ALL, 1_000_000, 1, true).unwrap();
        assert_eq!(best.makespan, brute_force_optimum(&inst).unwrap().0);
    }

    #[test]
    fn fully_frozen_keeps_the_machine_orders() {
        let (inst, sol) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = relax_with(&inst, &sol, 0.0, Neighborhood::TimeWindow, &mut rng);
        // frozen orders only allow left shifts
        let shifted = reoptimize(&inst, &sol, &a, DisjunctiveRules::ALL, 1000, 1, false).unwrap();
        assert!(shifted.makespan <= sol.makespan);
        let a = relax_with(&inst, &shifted, 0.0, Neighborhood::TimeWindow, &mut rng);
        let same = reoptimize(&inst, &shifted, &a, DisjunctiveRules::ALL, 1000, 1, false).unwrap();
        assert_eq!(same, shifted);
        assert!(reoptimize(&inst, &shifted, &a, DisjunctiveRules::ALL, 1000, 1, true).is_none());
    }
}
