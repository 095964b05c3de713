//! Depth-first branch-and-bound over a [`DomainStore`] with SetTimes
//! branching and a makespan cut that tightens on every solution.
//!
//! The search is resumable: when a budget runs out the explicit stack is
//! kept, and the next call continues from the same node under whatever
//! cutoff holds at that point.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::branch::{Decision, SetTimes};
use crate::engine::{DomainStore, Mark, OpId};
use crate::instance::Time;

/// Why a call to [`TreeSearch::run`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    /// The whole tree was explored under the final cut.
    Exhausted,
    /// A solution reached the target makespan (a lower bound).
    TargetReached,
    FailLimit,
    NodeLimit,
    Timeout,
    Stopped,
}

impl Outcome {
    /// The search can be resumed after this outcome.
    pub fn is_suspended(self) -> bool {
        !matches!(self, Outcome::Exhausted | Outcome::TargetReached)
    }
}

pub(crate) struct Limits<'a> {
    pub deadline: Instant,
    /// Fails allowed in this call.
    pub fail_limit: Option<u64>,
    /// Return once this many nodes pass without an improving solution (only
    /// after a first solution exists).
    pub stall_nodes: Option<u64>,
    pub stop: Option<&'a AtomicBool>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Counters {
    pub nodes: u64,
    pub fails: u64,
}

struct Frame {
    mark: Mark,
    postponed: usize,
    op: OpId,
    start: Time,
    right: bool,
}

pub(crate) struct TreeSearch {
    store: DomainStore,
    brancher: SetTimes,
    stack: Vec<Frame>,
    local_best: Option<Time>,
    found: bool,
    started: bool,
    done: Option<Outcome>,
}

impl TreeSearch {
    pub fn new(store: DomainStore) -> Self {
        let n = store.num_ops();
        Self {
            store,
            brancher: SetTimes::new(n),
            stack: Vec::new(),
            local_best: None,
            found: false,
            started: false,
            done: None,
        }
    }

    /// Explores the tree, continuing where the previous call stopped.
    ///
    /// `cutoff()` returns the best makespan known globally (if any); the
    /// search only looks for schedules strictly better than it and than
    /// every solution it finds itself. `on_solution` receives each improving
    /// store state and its makespan.
    pub fn run(
        &mut self,
        rng: &mut ChaCha8Rng,
        target: Time,
        limits: &Limits<'_>,
        counters: &mut Counters,
        cutoff: &dyn Fn() -> Option<Time>,
        on_solution: &mut dyn FnMut(&DomainStore, Time),
    ) -> Outcome {
        if let Some(done) = self.done {
            return done;
        }
        let outcome = self.explore(rng, target, limits, counters, cutoff, on_solution);
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

    /// Applies the current cut and propagates.
    fn tighten(&mut self, cutoff: &dyn Fn() -> Option<Time>) -> bool {
        match self.cut(cutoff) {
            Some(h) => self.store.tighten_horizon(h).is_ok() && self.store.propagate().is_ok(),
            None => true,
        }
    }

    fn explore(
        &mut self,
        rng: &mut ChaCha8Rng,
        target: Time,
        limits: &Limits<'_>,
        counters: &mut Counters,
        cutoff: &dyn Fn() -> Option<Time>,
        on_solution: &mut dyn FnMut(&DomainStore, Time),
    ) -> Outcome {
        let start_fails = counters.fails;
        let mut since_improvement = 0u64;

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
        }

        loop {
            // the current node is propagated and consistent
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
            if let Some(limit) = limits.stall_nodes {
                if self.found && since_improvement >= limit {
                    return Outcome::NodeLimit;
                }
            }

            if self.tighten(cutoff) {
                match self.brancher.select(&self.store, rng) {
                    Decision::AllScheduled => {
                        let makespan = (0..self.store.num_ops())
                            .map(|op| self.store.ect(op))
                            .max()
                            .unwrap_or(0);
                        on_solution(&self.store, makespan);
                        self.local_best = Some(makespan);
                        self.found = true;
                        since_improvement = 0;
                        if makespan <= target {
                            return Outcome::TargetReached;
                        }
                    }
                    Decision::DeadEnd => counters.fails += 1,
                    Decision::Branch(op) => {
                        counters.nodes += 1;
                        since_improvement += 1;
                        let start = self.store.est(op);
                        self.stack.push(Frame {
                            mark: self.store.mark(),
                            postponed: self.brancher.mark(),
                            op,
                            start,
                            right: false,
                        });
                        if self.store.fix_start(op, start).is_ok() && self.store.propagate().is_ok() {
                            continue;
                        }
                        counters.fails += 1;
                    }
                }
            } else {
                counters.fails += 1;
            }

            // backtrack to the deepest open right branch
            loop {
                let Some(frame) = self.stack.last_mut() else {
                    return Outcome::Exhausted;
                };
                self.store.restore(frame.mark);
                self.brancher.restore(frame.postponed);
                if frame.right {
                    self.stack.pop();
                    continue;
                }
                frame.right = true;
                let (op, start) = (frame.op, frame.start);
                self.brancher.postpone(op, start);
                if self.tighten(cutoff) {
                    break;
                }
                counters.fails += 1;
            }
        }
    }
}
