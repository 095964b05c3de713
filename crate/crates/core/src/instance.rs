//! Job-shop instance model, combinatorial lower bound and the independent
//! solution checker.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Time points and durations. 64-bit so that large generated instances can
/// sum durations without overflow.
pub type Time = i64;

/// One operation: a fixed machine and a strictly positive duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operation {
    pub machine: usize,
    pub duration: Time,
}

impl Operation {
    pub fn new(machine: usize, duration: Time) -> Self {
        Self { machine, duration }
    }
}

/// A job is an ordered precedence chain: op `k` must end before op `k + 1`
/// starts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub ops: Vec<Operation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("job {job} has no operations")]
    EmptyJob { job: usize },
    #[error("job {job} op {op}: machine {machine} out of range (instance has {num_machines} machines)")]
    MachineOutOfRange {
        job: usize,
        op: usize,
        machine: usize,
        num_machines: usize,
    },
    #[error("job {job} op {op}: duration {duration} must be positive")]
    NonPositiveDuration { job: usize, op: usize, duration: Time },
    #[error("successor array does not describe a single chain: {0}")]
    BadSuccessors(String),
}

impl Job {
    pub fn new(ops: Vec<Operation>) -> Self {
        Self { ops }
    }

    /// Builds a chain from operations plus a successor index per operation
    /// (`None` marks the last operation). The result lists ops in chain order.
    pub fn from_successors(ops: &[Operation], successors: &[Option<usize>]) -> Result<Self, ModelError> {
        let n = ops.len();
        if successors.len() != n {
            return Err(ModelError::BadSuccessors(format!(
                "{} successors for {} operations",
                successors.len(),
                n
            )));
        }
        if n == 0 {
            return Err(ModelError::BadSuccessors("no operations".into()));
        }
        let mut has_pred = vec![false; n];
        for succ in successors.iter().flatten() {
            if *succ >= n {
                return Err(ModelError::BadSuccessors(format!(
                    "successor index {succ} out of range"
                )));
            }
            if has_pred[*succ] {
                return Err(ModelError::BadSuccessors(format!(
                    "operation {succ} has two predecessors"
                )));
            }
            has_pred[*succ] = true;
        }
        let heads: Vec<usize> = (0..n).filter(|&i| !has_pred[i]).collect();
        if heads.len() != 1 {
            return Err(ModelError::BadSuccessors(format!("{} chain heads", heads.len())));
        }
        let mut chain = Vec::with_capacity(n);
        let mut cur = Some(heads[0]);
        while let Some(i) = cur {
            if chain.len() == n {
                return Err(ModelError::BadSuccessors("cycle".into()));
            }
            chain.push(ops[i]);
            cur = successors[i];
        }
        if chain.len() != n {
            return Err(ModelError::BadSuccessors("chain does not reach every operation".into()));
        }
        Ok(Self { ops: chain })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Sum of the chain's durations.
    pub fn total_duration(&self) -> Time {
        self.ops.iter().map(|o| o.duration).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub num_machines: usize,
    pub jobs: Vec<Job>,
}

impl Instance {
    /// Builds and validates an instance.
    pub fn new(name: impl Into<String>, num_machines: usize, jobs: Vec<Job>) -> Result<Self, ModelError> {
        let inst = Self {
            name: name.into(),
            num_machines,
            jobs,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (j, job) in self.jobs.iter().enumerate() {
            if job.is_empty() {
                return Err(ModelError::EmptyJob { job: j });
            }
            for (k, op) in job.ops.iter().enumerate() {
                if op.machine >= self.num_machines {
                    return Err(ModelError::MachineOutOfRange {
                        job: j,
                        op: k,
                        machine: op.machine,
                        num_machines: self.num_machines,
                    });
                }
                if op.duration <= 0 {
                    return Err(ModelError::NonPositiveDuration {
                        job: j,
                        op: k,
                        duration: op.duration,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_ops(&self) -> usize {
        self.jobs.iter().map(Job::len).sum()
    }

    pub fn total_duration(&self) -> Time {
        self.jobs.iter().map(Job::total_duration).sum()
    }

    /// Iterates `(job, op_index, op)` in job-major order.
    pub fn operations(&self) -> impl Iterator<Item = (usize, usize, &Operation)> + '_ {
        self.jobs
            .iter()
            .enumerate()
            .flat_map(|(j, job)| job.ops.iter().enumerate().map(move |(k, op)| (j, k, op)))
    }

    /// Total processing time assigned to each machine.
    pub fn machine_loads(&self) -> Vec<Time> {
        let mut loads = vec![0; self.num_machines];
        for (_, _, op) in self.operations() {
            loads[op.machine] += op.duration;
        }
        loads
    }

    /// True when every job visits every machine exactly once.
    pub fn is_rectangular(&self) -> bool {
        let mut seen = vec![usize::MAX; self.num_machines];
        self.jobs.iter().enumerate().all(|(j, job)| {
            job.len() == self.num_machines
                && job.ops.iter().all(|op| {
                    let fresh = seen[op.machine] != j;
                    seen[op.machine] = j;
                    fresh
                })
        })
    }

    /// True when some job visits a machine more than once.
    pub fn has_recirculation(&self) -> bool {
        let mut seen = vec![usize::MAX; self.num_machines];
        self.jobs.iter().enumerate().any(|(j, job)| {
            job.ops.iter().any(|op| {
                let again = seen[op.machine] == j;
                seen[op.machine] = j;
                again
            })
        })
    }
}

/// Makespan lower bound: the larger of the heaviest machine load and the
/// longest job chain.
pub fn lower_bound(inst: &Instance) -> Time {
    let machine = inst.machine_loads().into_iter().max().unwrap_or(0);
    let job = inst.jobs.iter().map(Job::total_duration).max().unwrap_or(0);
    machine.max(job)
}

/// A concrete schedule: one start time per `(job, op)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution {
    pub instance: String,
    pub makespan: Time,
    pub starts: Vec<Vec<Time>>,
}

impl Solution {
    /// Builds a solution and computes its makespan from the instance.
    pub fn from_starts(inst: &Instance, starts: Vec<Vec<Time>>) -> Self {
        let makespan = inst
            .jobs
            .iter()
            .zip(&starts)
            .flat_map(|(job, s)| job.ops.iter().zip(s).map(|(op, st)| st + op.duration))
            .max()
            .unwrap_or(0);
        Self {
            instance: inst.name.clone(),
            makespan,
            starts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// First violated constraint found by [`validate_solution`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The solution does not have one start per operation.
    Shape {
        job: usize,
        expected: usize,
        found: usize,
    },
    NegativeStart {
        job: usize,
        op: usize,
        start: Time,
    },
    Precedence {
        job: usize,
        op: usize,
        end: Time,
        next_start: Time,
    },
    Overlap {
        machine: usize,
        first: (usize, usize),
        second: (usize, usize),
        first_end: Time,
        second_start: Time,
    },
    Makespan {
        claimed: Time,
        actual: Time,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { job, expected, found } => {
                write!(f, "shape: job {job} has {found} starts, expected {expected}")
            }
            Violation::NegativeStart { job, op, start } => {
                write!(f, "negative start: job {job} op {op} starts at {start}")
            }
            Violation::Precedence {
                job,
                op,
                end,
                next_start,
            } => write!(
                f,
                "precedence: job {job} op {op} ends at {end} but op {} starts at {next_start}",
                op + 1
            ),
            Violation::Overlap {
                machine,
                first,
                second,
                first_end,
                second_start,
            } => write!(
                f,
                "overlap on machine {machine}: job {} op {} ends at {first_end}, job {} op {} starts at {second_start}",
                first.0, first.1, second.0, second.1
            ),
            Violation::Makespan { claimed, actual } => {
                write!(f, "makespan: claimed {claimed}, actual {actual}")
            }
        }
    }
}

impl std::error::Error for Violation {}

/// Checks a schedule against the instance without using the propagation
/// engine: chain order, unary machines with half-open intervals, and the
/// makespan field.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> Result<(), Violation> {
    if sol.starts.len() != inst.num_jobs() {
        return Err(Violation::Shape {
            job: sol.starts.len().min(inst.num_jobs()),
            expected: inst.num_jobs(),
            found: sol.starts.len(),
        });
    }
    for (j, (job, starts)) in inst.jobs.iter().zip(&sol.starts).enumerate() {
        if starts.len() != job.len() {
            return Err(Violation::Shape {
                job: j,
                expected: job.len(),
                found: starts.len(),
            });
        }
        for (k, &s) in starts.iter().enumerate() {
            if s < 0 {
                return Err(Violation::NegativeStart {
                    job: j,
                    op: k,
                    start: s,
                });
            }
        }
        for k in 1..job.len() {
            let end = starts[k - 1] + job.ops[k - 1].duration;
            if end > starts[k] {
                return Err(Violation::Precedence {
                    job: j,
                    op: k - 1,
                    end,
                    next_start: starts[k],
                });
            }
        }
    }

    let mut per_machine: Vec<Vec<(Time, Time, usize, usize)>> = vec![Vec::new(); inst.num_machines];
    let mut actual = 0;
    for (j, k, op) in inst.operations() {
        let s = sol.starts[j][k];
        per_machine[op.machine].push((s, s + op.duration, j, k));
        actual = actual.max(s + op.duration);
    }
    for (m, ivs) in per_machine.iter_mut().enumerate() {
        ivs.sort_unstable();
        for w in ivs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.1 > b.0 {
                return Err(Violation::Overlap {
                    machine: m,
                    first: (a.2, a.3),
                    second: (b.2, b.3),
                    first_end: a.1,
                    second_start: b.0,
                });
            }
        }
    }
    if sol.makespan != actual {
        return Err(Violation::Makespan {
            claimed: sol.makespan,
            actual,
        });
    }
    Ok(())
}
