//! Interval-variable domain store with trailing, and the propagation
//! fixpoint over precedence chains and per-machine no-overlap constraints.
//!
//! Every operation is an interval of fixed length whose start lies in
//! `[est, lst]`. Completion bounds are derived (`ect = est + len`,
//! `lct = lst + len`), so the coupling between start and end holds by
//! construction. Intervals are half-open: `[start, start + len)`.

mod disjunctive;
mod theta;

use std::collections::VecDeque;

use thiserror::Error;

pub use disjunctive::DisjunctiveRules;
use disjunctive::UnaryFilter;

use crate::instance::{Instance, Time};

/// Flat operation index (job-major order).
pub type OpId = usize;

/// Raised whenever propagation empties a domain.
#[derive(Debug, Clone, Copy, Error, PartialEq, Eq, Hash)]
#[error("inconsistency")]
pub struct Inconsistency;

pub type PropResult<T = ()> = Result<T, Inconsistency>;

/// Read-only view of one operation's bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntervalVar {
    pub est: Time,
    pub lst: Time,
    pub ect: Time,
    pub lct: Time,
    pub len: Time,
}

/// The operations posted on one machine's no-overlap constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachinePosting {
    pub machine: usize,
    pub members: Vec<OpId>,
}

/// Static structure of a scheduling problem: durations, precedence chains
/// and machine postings. Job chains come first in `chains`; extra chains
/// (for instance the frozen machine orders used by LNS) may be appended.
#[derive(Debug, Clone)]
pub struct Model {
    len: Vec<Time>,
    machine_of: Vec<usize>,
    job_of: Vec<usize>,
    job_offsets: Vec<usize>,
    chains: Vec<Vec<OpId>>,
    machines: Vec<MachinePosting>,
    /// Propagators to wake when an op's bounds change.
    watchers: Vec<Vec<usize>>,
}

impl Model {
    pub fn from_instance(inst: &Instance) -> Self {
        let mut len = Vec::with_capacity(inst.num_ops());
        let mut machine_of = Vec::with_capacity(inst.num_ops());
        let mut job_of = Vec::with_capacity(inst.num_ops());
        let mut job_offsets = Vec::with_capacity(inst.num_jobs() + 1);
        let mut chains = Vec::with_capacity(inst.num_jobs());
        let mut machines: Vec<MachinePosting> = (0..inst.num_machines)
            .map(|m| MachinePosting {
                machine: m,
                members: Vec::new(),
            })
            .collect();
        for (j, job) in inst.jobs.iter().enumerate() {
            job_offsets.push(len.len());
            let mut chain = Vec::with_capacity(job.len());
            for op in &job.ops {
                let id = len.len();
                len.push(op.duration);
                machine_of.push(op.machine);
                job_of.push(j);
                machines[op.machine].members.push(id);
                chain.push(id);
            }
            chains.push(chain);
        }
        job_offsets.push(len.len());
        let mut model = Self {
            watchers: vec![Vec::new(); len.len()],
            len,
            machine_of,
            job_of,
            job_offsets,
            chains: Vec::new(),
            machines,
        };
        model.add_chains(chains);
        model
    }

    /// Adds a precedence chain: each op ends before the next one starts.
    pub fn add_chain(&mut self, chain: Vec<OpId>) {
        self.add_chains(std::iter::once(chain));
    }

    pub fn add_chains(&mut self, chains: impl IntoIterator<Item = Vec<OpId>>) {
        for chain in chains {
            if chain.len() < 2 && self.chains.len() >= self.num_jobs() {
                continue;
            }
            let id = self.chains.len();
            for &op in &chain {
                self.watchers[op].push(id);
            }
            self.chains.push(chain);
        }
        // machine propagator ids live after all chains
        self.rebuild_machine_watchers();
    }

    fn rebuild_machine_watchers(&mut self) {
        let base = self.chains.len();
        for w in &mut self.watchers {
            w.retain(|&p| p < base);
        }
        for (m, posting) in self.machines.iter().enumerate() {
            if posting.members.len() > 1 {
                for &op in &posting.members {
                    self.watchers[op].push(base + m);
                }
            }
        }
    }

    pub fn num_ops(&self) -> usize {
        self.len.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.job_offsets.len() - 1
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn len(&self, op: OpId) -> Time {
        self.len[op]
    }

    pub fn machine(&self, op: OpId) -> usize {
        self.machine_of[op]
    }

    pub fn job(&self, op: OpId) -> usize {
        self.job_of[op]
    }

    /// Flat id of `(job, index)`.
    pub fn op_id(&self, job: usize, index: usize) -> OpId {
        self.job_offsets[job] + index
    }

    /// `(job, index)` of a flat id.
    pub fn op_position(&self, op: OpId) -> (usize, usize) {
        let j = self.job_of[op];
        (j, op - self.job_offsets[j])
    }

    pub fn job_ops(&self, job: usize) -> std::ops::Range<OpId> {
        self.job_offsets[job]..self.job_offsets[job + 1]
    }

    pub fn chains(&self) -> &[Vec<OpId>] {
        &self.chains
    }

    pub fn postings(&self) -> &[MachinePosting] {
        &self.machines
    }

    pub fn total_duration(&self) -> Time {
        self.len.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Est,
    Lst,
    /// `op` is a machine index and `old` its previous ranked count.
    Rank,
}

#[derive(Debug, Clone, Copy)]
struct TrailEntry {
    op: OpId,
    bound: Bound,
    old: Time,
}

/// Position in the trail; restoring to it undoes every later change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark {
    trail_len: usize,
    horizon: Time,
}

/// Mutable search state: start-time bounds for every operation plus the
/// trail used to backtrack.
#[derive(Debug)]
pub struct DomainStore {
    model: Model,
    rules: DisjunctiveRules,
    est: Vec<Time>,
    lst: Vec<Time>,
    horizon: Time,
    failed: bool,
    trail: Vec<TrailEntry>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    shuffle: Option<u64>,
    filter: UnaryFilter,
    /// Per machine: its members with the ranked prefix first.
    sequence: Vec<Vec<OpId>>,
    ranked: Vec<usize>,
}

impl DomainStore {
    /// Store with every op in `[0, horizon - len]`. The default horizon is
    /// the sum of all durations, which always admits a schedule.
    pub fn new(model: Model, rules: DisjunctiveRules) -> Self {
        let horizon = model.total_duration();
        Self::with_horizon(model, rules, horizon)
    }

    pub fn with_horizon(model: Model, rules: DisjunctiveRules, horizon: Time) -> Self {
        let n = model.num_ops();
        let num_props = model.chains.len() + model.machines.len();
        let lst: Vec<Time> = (0..n).map(|op| horizon - model.len[op]).collect();
        let failed = lst.iter().any(|&l| l < 0);
        Self {
            rules,
            est: vec![0; n],
            lst,
            horizon,
            failed,
            trail: Vec::new(),
            queue: VecDeque::new(),
            queued: vec![false; num_props],
            shuffle: None,
            filter: UnaryFilter::default(),
            sequence: model.machines.iter().map(|p| p.members.clone()).collect(),
            ranked: vec![0; model.machines.len()],
            model,
        }
    }

    pub fn from_instance(inst: &Instance, rules: DisjunctiveRules) -> Self {
        Self::new(Model::from_instance(inst), rules)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn rules(&self) -> DisjunctiveRules {
        self.rules
    }

    pub fn num_ops(&self) -> usize {
        self.est.len()
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub fn est(&self, op: OpId) -> Time {
        self.est[op]
    }

    pub fn lst(&self, op: OpId) -> Time {
        self.lst[op]
    }

    pub fn ect(&self, op: OpId) -> Time {
        self.est[op] + self.model.len[op]
    }

    pub fn lct(&self, op: OpId) -> Time {
        self.lst[op] + self.model.len[op]
    }

    pub fn len(&self, op: OpId) -> Time {
        self.model.len[op]
    }

    pub fn is_fixed(&self, op: OpId) -> bool {
        self.est[op] == self.lst[op]
    }

    pub fn interval(&self, op: OpId) -> IntervalVar {
        let len = self.model.len[op];
        IntervalVar {
            est: self.est[op],
            lst: self.lst[op],
            ect: self.est[op] + len,
            lct: self.lst[op] + len,
            len,
        }
    }

    /// Snapshot of all `(est, lst)` pairs.
    pub fn bounds(&self) -> Vec<(Time, Time)> {
        self.est.iter().copied().zip(self.lst.iter().copied()).collect()
    }

    /// Earliest starts of all ops, i.e. the schedule once every op is fixed.
    pub fn earliest_starts(&self) -> &[Time] {
        &self.est
    }

    pub fn mark(&self) -> Mark {
        Mark {
            trail_len: self.trail.len(),
            horizon: self.horizon,
        }
    }

    /// Undoes every bound change made after `mark`.
    pub fn restore(&mut self, mark: Mark) {
        while self.trail.len() > mark.trail_len {
            let e = self.trail.pop().unwrap();
            match e.bound {
                Bound::Est => self.est[e.op] = e.old,
                Bound::Lst => self.lst[e.op] = e.old,
                Bound::Rank => self.ranked[e.op] = e.old as usize,
            }
        }
        self.horizon = mark.horizon;
        self.failed = false;
        self.clear_queue();
    }

    /// Pops the propagation queue in a seeded random order instead of FIFO.
    /// Used to check that the fixpoint does not depend on scheduling order.
    pub fn set_queue_shuffle(&mut self, seed: Option<u64>) {
        self.shuffle = seed.map(|s| s | 1);
    }

    fn fail(&mut self) -> Inconsistency {
        self.failed = true;
        self.clear_queue();
        Inconsistency
    }

    fn clear_queue(&mut self) {
        for p in self.queue.drain(..) {
            self.queued[p] = false;
        }
    }

    fn wake(&mut self, op: OpId) {
        for &p in &self.model.watchers[op] {
            if !self.queued[p] {
                self.queued[p] = true;
                self.queue.push_back(p);
            }
        }
    }

    /// Raises the earliest start of `op`. Returns whether the bound moved.
    pub fn set_est(&mut self, op: OpId, value: Time) -> PropResult<bool> {
        if self.failed {
            return Err(Inconsistency);
        }
        if value <= self.est[op] {
            return Ok(false);
        }
        self.trail.push(TrailEntry {
            op,
            bound: Bound::Est,
            old: self.est[op],
        });
        self.est[op] = value;
        if value > self.lst[op] {
            return Err(self.fail());
        }
        self.wake(op);
        Ok(true)
    }

    /// Lowers the latest start of `op`.
    pub fn set_lst(&mut self, op: OpId, value: Time) -> PropResult<bool> {
        if self.failed {
            return Err(Inconsistency);
        }
        if value >= self.lst[op] {
            return Ok(false);
        }
        self.trail.push(TrailEntry {
            op,
            bound: Bound::Lst,
            old: self.lst[op],
        });
        self.lst[op] = value;
        if value < self.est[op] {
            return Err(self.fail());
        }
        self.wake(op);
        Ok(true)
    }

    pub fn set_ect(&mut self, op: OpId, value: Time) -> PropResult<bool> {
        self.set_est(op, value - self.model.len[op])
    }

    pub fn set_lct(&mut self, op: OpId, value: Time) -> PropResult<bool> {
        self.set_lst(op, value - self.model.len[op])
    }

    pub fn fix_start(&mut self, op: OpId, start: Time) -> PropResult {
        self.set_est(op, start)?;
        self.set_lst(op, start)?;
        Ok(())
    }

    /// Imposes `end <= horizon` on every op (the makespan cut).
    pub fn tighten_horizon(&mut self, horizon: Time) -> PropResult {
        if self.failed {
            return Err(Inconsistency);
        }
        if horizon >= self.horizon {
            return Ok(());
        }
        self.horizon = horizon;
        for op in 0..self.num_ops() {
            self.set_lct(op, horizon)?;
        }
        Ok(())
    }

    /// Enforces one precedence chain to its fixpoint: a forward pass on
    /// earliest starts and a backward pass on latest starts.
    pub fn propagate_chain(&mut self, chain: usize) -> PropResult {
        let n = self.model.chains[chain].len();
        for k in 1..n {
            let (a, b) = (self.model.chains[chain][k - 1], self.model.chains[chain][k]);
            let ect_a = self.ect(a);
            self.set_est(b, ect_a)?;
        }
        for k in (1..n).rev() {
            let (a, b) = (self.model.chains[chain][k - 1], self.model.chains[chain][k]);
            let lst_b = self.lst[b];
            self.set_lct(a, lst_b)?;
        }
        Ok(())
    }

    /// Precedence propagation for job `job`'s operation chain.
    pub fn propagate_precedence(&mut self, job: usize) -> PropResult {
        self.propagate_chain(job)
    }

    /// Unary-resource filtering on one machine, iterated until it no longer
    /// changes any bound.
    pub fn propagate_disjunctive(&mut self, machine: usize) -> PropResult {
        if self.failed {
            return Err(Inconsistency);
        }
        let members = std::mem::take(&mut self.model.machines[machine].members);
        let mut res = self.filter_machine(&members);
        while res.is_ok() && self.ranked[machine] > 0 {
            match self.enforce_sequence(machine) {
                Ok(true) => res = self.filter_machine(&members),
                Ok(false) => break,
                Err(e) => res = Err(e),
            }
        }
        self.model.machines[machine].members = members;
        res
    }

    /// The ranked prefix of a machine runs in order and before every
    /// unranked member. Returns whether a bound moved.
    fn enforce_sequence(&mut self, machine: usize) -> PropResult<bool> {
        let k = self.ranked[machine];
        let seq = std::mem::take(&mut self.sequence[machine]);
        let res = (|| {
            let mut changed = false;
            for i in 1..seq.len() {
                let prev = if i < k { seq[i - 1] } else { seq[k - 1] };
                let ect = self.ect(prev);
                changed |= self.set_est(seq[i], ect)?;
            }
            let min_lst = seq[k..].iter().map(|&op| self.lst[op]).min();
            if let Some(l) = min_lst {
                changed |= self.set_lct(seq[k - 1], l)?;
            }
            for i in (1..k).rev() {
                let lst = self.lst[seq[i]];
                changed |= self.set_lct(seq[i - 1], lst)?;
            }
            Ok(changed)
        })();
        self.sequence[machine] = seq;
        res
    }

    /// Number of ranked members of `machine`.
    pub fn num_ranked(&self, machine: usize) -> usize {
        self.ranked[machine]
    }

    /// Members of `machine`: the ranked ones in order, then the rest.
    pub fn sequence(&self, machine: usize) -> &[OpId] {
        &self.sequence[machine]
    }

    /// Ranks `op` directly after the current ranked prefix of its machine,
    /// i.e. before every op of the machine not ranked yet. Call
    /// [`propagate`](Self::propagate) afterwards.
    pub fn rank_next(&mut self, op: OpId) -> PropResult {
        if self.failed {
            return Err(Inconsistency);
        }
        let m = self.model.machine_of[op];
        let k = self.ranked[m];
        let pos = k + self.sequence[m][k..]
            .iter()
            .position(|&o| o == op)
            .expect("op is not ranked yet");
        self.sequence[m].swap(k, pos);
        self.trail.push(TrailEntry {
            op: m,
            bound: Bound::Rank,
            old: k as Time,
        });
        self.ranked[m] = k + 1;
        let p = self.model.chains.len() + m;
        if !self.queued[p] {
            self.queued[p] = true;
            self.queue.push_back(p);
        }
        Ok(())
    }

    fn filter_machine(&mut self, members: &[OpId]) -> PropResult {
        if members.len() < 2 {
            return Ok(());
        }
        loop {
            self.filter.clear();
            for &op in members {
                let (est, lct, len) = (self.est[op], self.lct(op), self.model.len[op]);
                self.filter.push(est, lct, len);
            }
            if self.filter.run(self.rules).is_err() {
                return Err(self.fail());
            }
            let mut changed = false;
            for (i, &op) in members.iter().enumerate() {
                let (ne, nl) = (self.filter.new_est[i], self.filter.new_lct[i]);
                changed |= self.set_est(op, ne)?;
                changed |= self.set_lct(op, nl)?;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn run_propagator(&mut self, p: usize) -> PropResult {
        // Both propagators are idempotent, so their own bound changes need
        // not wake them again.
        self.queued[p] = true;
        let chains = self.model.chains.len();
        let res = if p < chains {
            self.propagate_chain(p)
        } else {
            self.propagate_disjunctive(p - chains)
        };
        self.queued[p] = false;
        res
    }

    fn pop(&mut self) -> Option<usize> {
        let p = match self.shuffle.as_mut() {
            None => self.queue.pop_front()?,
            Some(state) => {
                if self.queue.is_empty() {
                    return None;
                }
                // xorshift64
                *state ^= *state << 13;
                *state ^= *state >> 7;
                *state ^= *state << 17;
                let i = (*state % self.queue.len() as u64) as usize;
                self.queue.swap_remove_back(i)?
            }
        };
        self.queued[p] = false;
        Some(p)
    }

    /// Runs the queued propagators until quiescence.
    pub fn propagate(&mut self) -> PropResult {
        if self.failed {
            return Err(Inconsistency);
        }
        while let Some(p) = self.pop() {
            self.run_propagator(p)?;
        }
        self.debug_check();
        Ok(())
    }

    /// Schedules every propagator and runs to quiescence.
    pub fn fixpoint(&mut self) -> PropResult {
        if self.failed {
            return Err(Inconsistency);
        }
        let total = self.model.chains.len() + self.model.machines.len();
        for p in 0..total {
            if !self.queued[p] {
                self.queued[p] = true;
                self.queue.push_back(p);
            }
        }
        self.propagate()
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) {
            for op in 0..self.num_ops() {
                let iv = self.interval(op);
                debug_assert!(iv.est <= iv.lst, "op {op}: est {} > lst {}", iv.est, iv.lst);
                debug_assert_eq!(iv.ect, iv.est + iv.len);
                debug_assert_eq!(iv.lct, iv.lst + iv.len);
            }
        }
    }
}
