//! Depth-first branch-and-bound that ranks machines instead of setting
//! start times. Each node picks the machine with the least slack and
//! branches on which of its unranked ops runs next. The sequences, not the
//! start times, are the decisions, so a refutation covers every schedule
//! with that order prefix at once. Used for optimality proofs.

use std::sync::atomic::Ordering;
use std::time::Instant;

use super::tree::{Counters, Limits, Outcome};
use crate::engine::{DomainStore, Mark, OpId};
use crate::instance::Time;

struct Frame {
    mark: Mark,
    candidates: Vec<OpId>,
    next: usize,
}

pub(crate) struct RankSearch {
    store: DomainStore,
    stack: Vec<Frame>,
    local_best: Option<Time>,
    started: bool,
    /// The current node still needs to be expanded.
    pending: bool,
    done: Option<Outcome>,
}

enum Choice {
    Complete,
    Branch(Vec<OpId>),
    DeadEnd,
}

impl RankSearch {
    pub fn new(store: DomainStore) -> Self {
        Self {
            store,
            stack: Vec::new(),
            local_best: None,
            started: false,
            pending: false,
            done: None,
        }
    }

    /// Same contract as [`TreeSearch::run`](super::tree::TreeSearch::run).
    pub fn run(
        &mut self,
        target: Time,
        limits: &Limits<'_>,
        counters: &mut Counters,
        cutoff: &dyn Fn() -> Option<Time>,
        on_solution: &mut dyn FnMut(&DomainStore, Time),
    ) -> Outcome {
        if let Some(done) = self.done {
            return done;
        }
        let outcome = self.explore(target, limits, counters, cutoff, on_solution);
        if !outcome.is_suspended() {
            self.done = Some(outcome);
        }
        outcome
    }

    fn cut(&self, cutoff: &dyn Fn() -> Option<Time>) -> Option<Time> {
        let best = match (cutoff(), self.local_best) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        best.map(|c| c - 1).filter(|&c| c < self.store.horizon())
    }

    fn tighten(&mut self, cutoff: &dyn Fn() -> Option<Time>) -> bool {
        match self.cut(cutoff) {
            Some(h) => self.store.tighten_horizon(h).is_ok() && self.store.propagate().is_ok(),
            None => true,
        }
    }

    /// The machine with the least slack among those with two or more
    /// unranked ops, and the ops that can still run next on it.
    fn choose(&self) -> Choice {
        let store = &self.store;
        let mut best: Option<(Time, usize)> = None;
        for m in 0..store.model().num_machines() {
            let rest = &store.sequence(m)[store.num_ranked(m)..];
            if rest.len() < 2 {
                continue;
            }
            let est = rest.iter().map(|&op| store.est(op)).min().unwrap();
            let lct = rest.iter().map(|&op| store.lct(op)).max().unwrap();
            let load: Time = rest.iter().map(|&op| store.len(op)).sum();
            let key = (lct - est - load, m);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let Some((_, m)) = best else {
            return Choice::Complete;
        };
        let rest = &store.sequence(m)[store.num_ranked(m)..];
        // op can go next only if it can end before every other one must start
        let (mut lst1, mut lst2) = (Time::MAX, Time::MAX);
        for &op in rest {
            let l = store.lst(op);
            if l < lst1 {
                lst2 = lst1;
                lst1 = l;
            } else if l < lst2 {
                lst2 = l;
            }
        }
        let mut candidates: Vec<OpId> = rest
            .iter()
            .copied()
            .filter(|&op| {
                let others = if store.lst(op) == lst1 { lst2 } else { lst1 };
                store.ect(op) <= others
            })
            .collect();
        if candidates.is_empty() {
            return Choice::DeadEnd;
        }
        candidates.sort_by_key(|&op| (store.est(op), store.lct(op), op));
        Choice::Branch(candidates)
    }

    fn explore(
        &mut self,
        target: Time,
        limits: &Limits<'_>,
        counters: &mut Counters,
        cutoff: &dyn Fn() -> Option<Time>,
        on_solution: &mut dyn FnMut(&DomainStore, Time),
    ) -> Outcome {
        let start_fails = counters.fails;

        if !self.started {
            self.started = true;
            let ok = match self.cut(cutoff) {
                Some(h) => self.store.tighten_horizon(h).is_ok() && self.store.fixpoint().is_ok(),
                None => self.store.fixpoint().is_ok(),
            };
            if !ok {
                counters.fails += 1;
                return Outcome::Exhausted;
            }
            self.pending = true;
        }

        loop {
            if let Some(stop) = limits.stop {
                if stop.load(Ordering::Relaxed) {
                    return Outcome::Stopped;
                }
            }
            if Instant::now() >= limits.deadline {
                return Outcome::Timeout;
            }
            if let Some(limit) = limits.fail_limit {
                if counters.fails - start_fails >= limit {
                    return Outcome::FailLimit;
                }
            }

            if self.pending {
                // the current node is propagated; check it under the cut
                if self.tighten(cutoff) {
                    match self.choose() {
                        Choice::Complete => {
                            let makespan = (0..self.store.num_ops())
                                .map(|op| self.store.ect(op))
                                .max()
                                .unwrap_or(0);
                            on_solution(&self.store, makespan);
                            self.local_best = Some(makespan);
                            if makespan <= target {
                                return Outcome::TargetReached;
                            }
                        }
                        Choice::DeadEnd => counters.fails += 1,
                        Choice::Branch(candidates) => {
                            counters.nodes += 1;
                            self.stack.push(Frame {
                                mark: self.store.mark(),
                                candidates,
                                next: 0,
                            });
                        }
                    }
                } else {
                    counters.fails += 1;
                }
            }

            // try the next alternative of the deepest open frame
            let Some(frame) = self.stack.last_mut() else {
                return Outcome::Exhausted;
            };
            self.store.restore(frame.mark);
            if frame.next == frame.candidates.len() {
                self.stack.pop();
                self.pending = false;
                continue;
            }
            let op = frame.candidates[frame.next];
            frame.next += 1;
            self.pending = self.store.rank_next(op).is_ok() && self.store.propagate().is_ok();
            if !self.pending {
                counters.fails += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::time::Duration;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::engine::{DisjunctiveRules, Model};
    use crate::harness::brute_force_optimum;
    use crate::instance::{validate_solution, Instance, Job, Operation};
    use crate::search::store_solution;

    fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
        let (jobs, machines) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let jobs = (0..jobs)
            .map(|_| {
                let k = rng.gen_range(1..=3);
                Job::new(
                    (0..k)
                        .map(|_| Operation::new(rng.gen_range(0..machines), rng.gen_range(1..=9)))
                        .collect(),
                )
            })
            .collect();
        Instance::new("r", machines, jobs).unwrap()
    }

    /// Runs to completion; returns the best makespan found.
    fn minimize(inst: &Instance) -> Option<Time> {
        let store = DomainStore::new(Model::from_instance(inst), DisjunctiveRules::ALL);
        let mut tree = RankSearch::new(store);
        let limits = Limits {
            deadline: Instant::now() + Duration::from_secs(10),
            fail_limit: None,
            stall_nodes: None,
            stop: None,
        };
        let mut best = None;
        let outcome = tree.run(0, &limits, &mut Counters::default(), &|| None, &mut |s, m| {
            assert_eq!(validate_solution(inst, &store_solution(inst, s)), Ok(()));
            assert_eq!(store_solution(inst, s).makespan, m);
            assert!(best.is_none_or(|b| m < b));
            best = Some(m);
        });
        assert_eq!(outcome, Outcome::Exhausted);
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let inst = random_instance(&mut rng);
            let opt = brute_force_optimum(&inst).unwrap().0;
            assert_eq!(minimize(&inst), Some(opt), "{inst:?}");
        }
    }

    #[test]
    fn resumes_after_fail_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let inst = random_instance(&mut rng);
            let opt = brute_force_optimum(&inst).unwrap().0;
            let store = DomainStore::new(Model::from_instance(&inst), DisjunctiveRules::ALL);
            let mut tree = RankSearch::new(store);
            let limits = Limits {
                deadline: Instant::now() + Duration::from_secs(10),
                fail_limit: Some(1),
                stall_nodes: None,
                stop: None,
            };
            let mut best = None;
            let mut counters = Counters::default();
            let outcome = loop {
                let o = tree.run(0, &limits, &mut counters, &|| None, &mut |_, m| best = Some(m));
                if o != Outcome::FailLimit {
                    break o;
                }
            };
            assert_eq!(outcome, Outcome::Exhausted);
            assert_eq!(best, Some(opt));
        }
    }
}
