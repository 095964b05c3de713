//! Exhaustive optimum for tiny instances. Enumerates every combination of
//! machine orderings, times each one with earliest starts over the induced
//! precedence graph, and keeps the best. Shares no code with the engine.

use thiserror::Error;

use crate::instance::{Instance, Solution, Time};

/// Largest number of machine-order combinations the oracle will enumerate
/// when the instance has more than [`MAX_OPS_UNGUARDED`] operations.
pub const MAX_COMBINATIONS: u128 = 1_000_000;
pub const MAX_OPS_UNGUARDED: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for enumeration: {ops} operations, {combinations} machine-order combinations")]
    TooLarge { ops: usize, combinations: u128 },
}

/// Number of machine-order combinations (product of per-machine factorials),
/// saturating.
pub fn combination_count(inst: &Instance) -> u128 {
    let mut per_machine = vec![0u128; inst.num_machines];
    for (_, _, op) in inst.operations() {
        per_machine[op.machine] += 1;
    }
    per_machine.iter().fold(1u128, |acc, &k| {
        let f = (1..=k).fold(1u128, |f, x| f.saturating_mul(x));
        acc.saturating_mul(f)
    })
}

pub fn brute_force_optimum(inst: &Instance) -> Result<(Time, Solution), OracleError> {
    let ops = inst.num_ops();
    let combinations = combination_count(inst);
    if ops > MAX_OPS_UNGUARDED && combinations > MAX_COMBINATIONS {
        return Err(OracleError::TooLarge { ops, combinations });
    }

    let mut id_of = Vec::with_capacity(inst.num_jobs());
    let mut dur = Vec::with_capacity(ops);
    let mut job_pred = Vec::with_capacity(ops);
    let mut machine_ops: Vec<Vec<usize>> = vec![Vec::new(); inst.num_machines];
    for job in &inst.jobs {
        let mut ids = Vec::with_capacity(job.len());
        for (k, op) in job.ops.iter().enumerate() {
            let id = dur.len();
            dur.push(op.duration);
            job_pred.push(if k == 0 { None } else { Some(id - 1) });
            machine_ops[op.machine].push(id);
            ids.push(id);
        }
        id_of.push(ids);
    }
    for m in &mut machine_ops {
        m.sort_unstable();
    }

    let mut search = Enumeration {
        dur,
        job_pred,
        orders: machine_ops,
        best: Time::MAX,
        best_starts: Vec::new(),
        machine_pred: vec![None; ops],
        starts: vec![0; ops],
        indeg: vec![0; ops],
        succs: vec![Vec::with_capacity(2); ops],
        stack: Vec::with_capacity(ops),
    };
    search.enumerate(0);

    let starts = id_of
        .iter()
        .map(|ids| ids.iter().map(|&id| search.best_starts[id]).collect())
        .collect();
    let sol = Solution::from_starts(inst, starts);
    debug_assert_eq!(sol.makespan, search.best);
    Ok((search.best, sol))
}

struct Enumeration {
    dur: Vec<Time>,
    job_pred: Vec<Option<usize>>,
    orders: Vec<Vec<usize>>,
    best: Time,
    best_starts: Vec<Time>,
    machine_pred: Vec<Option<usize>>,
    starts: Vec<Time>,
    indeg: Vec<usize>,
    succs: Vec<Vec<usize>>,
    stack: Vec<usize>,
}

impl Enumeration {
    fn enumerate(&mut self, machine: usize) {
        if machine == self.orders.len() {
            self.evaluate();
            return;
        }
        // orders[machine] starts sorted; next_permutation walks all orders
        loop {
            self.enumerate(machine + 1);
            if !next_permutation(&mut self.orders[machine]) {
                break;
            }
        }
    }

    /// Earliest-start timing of the current orderings (Kahn's algorithm);
    /// a cycle means the orderings are inconsistent with the job chains.
    fn evaluate(&mut self) {
        let n = self.dur.len();
        for v in &mut self.machine_pred {
            *v = None;
        }
        for order in &self.orders {
            for w in order.windows(2) {
                self.machine_pred[w[1]] = Some(w[0]);
            }
        }
        for s in &mut self.succs {
            s.clear();
        }
        for op in 0..n {
            self.indeg[op] = 0;
            self.starts[op] = 0;
        }
        for op in 0..n {
            for p in [self.job_pred[op], self.machine_pred[op]].into_iter().flatten() {
                self.succs[p].push(op);
                self.indeg[op] += 1;
            }
        }
        self.stack.clear();
        self.stack.extend((0..n).filter(|&op| self.indeg[op] == 0));
        let mut done = 0;
        let mut makespan = 0;
        while let Some(op) = self.stack.pop() {
            done += 1;
            let end = self.starts[op] + self.dur[op];
            makespan = makespan.max(end);
            for i in 0..self.succs[op].len() {
                let s = self.succs[op][i];
                self.starts[s] = self.starts[s].max(end);
                self.indeg[s] -= 1;
                if self.indeg[s] == 0 {
                    self.stack.push(s);
                }
            }
        }
        if done == n && makespan < self.best {
            self.best = makespan;
            self.best_starts.clone_from(&self.starts);
        }
    }
}

/// Advances to the next lexicographic permutation; false after the last one
/// (the slice is then back in sorted order).
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
