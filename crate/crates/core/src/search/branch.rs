//! SetTimes branching with postponement.
//!
//! Left branch: start the selected op at its earliest start. Right branch:
//! postpone it; a postponed op becomes selectable again only once
//! propagation raises its earliest start.

use rand::Rng;

use crate::engine::{DomainStore, OpId};
use crate::instance::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Every op has a fixed start.
    AllScheduled,
    /// Branch on this op: start it at its current `est`, or postpone it.
    Branch(OpId),
    /// Unscheduled ops remain but none can be scheduled any more.
    DeadEnd,
}

#[derive(Debug, Clone)]
pub struct SetTimes {
    /// `Some(est)` while postponed: the earliest start it was postponed at.
    postponed: Vec<Option<Time>>,
    /// Postponed ops with their previous state, for undo.
    stack: Vec<(OpId, Option<Time>)>,
}

impl SetTimes {
    pub fn new(num_ops: usize) -> Self {
        Self {
            postponed: vec![None; num_ops],
            stack: Vec::new(),
        }
    }

    pub fn mark(&self) -> usize {
        self.stack.len()
    }

    pub fn restore(&mut self, mark: usize) {
        while self.stack.len() > mark {
            let (op, previous) = self.stack.pop().unwrap();
            self.postponed[op] = previous;
        }
    }

    pub fn postpone(&mut self, op: OpId, est: Time) {
        self.stack.push((op, self.postponed[op]));
        self.postponed[op] = Some(est);
    }

    fn is_available(&self, store: &DomainStore, op: OpId) -> bool {
        match self.postponed[op] {
            None => true,
            Some(at) => store.est(op) > at,
        }
    }

    /// Picks the unscheduled, available op with the smallest earliest start;
    /// ties go to the smallest latest completion, then the smallest machine
    /// index, then a seeded coin.
    pub fn select<R: Rng>(&self, store: &DomainStore, rng: &mut R) -> Decision {
        let model = store.model();
        let mut best: Option<(Time, Time, usize)> = None;
        let mut chosen = None;
        let mut ties = 0u32;
        let mut unscheduled = false;
        for op in 0..store.num_ops() {
            if store.is_fixed(op) {
                continue;
            }
            unscheduled = true;
            if !self.is_available(store, op) {
                continue;
            }
            let key = (store.est(op), store.lct(op), model.machine(op));
            match best {
                Some(b) if key > b => {}
                Some(b) if key == b => {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        chosen = Some(op);
                    }
                }
                _ => {
                    best = Some(key);
                    chosen = Some(op);
                    ties = 1;
                }
            }
        }
        let Some(op) = chosen else {
            return if unscheduled {
                Decision::DeadEnd
            } else {
                Decision::AllScheduled
            };
        };
        // A postponed op that must start before anything else can be
        // scheduled will never be picked again.
        let min_est = store.est(op);
        for &(p, _) in &self.stack {
            if !store.is_fixed(p) && !self.is_available(store, p) && store.lst(p) < min_est {
                return Decision::DeadEnd;
            }
        }
        Decision::Branch(op)
    }
}
