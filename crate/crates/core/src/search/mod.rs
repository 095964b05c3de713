//! Search: exact branch-and-bound, large neighbourhood search and a
//! multi-worker portfolio sharing one incumbent.

mod branch;
mod lns;
mod portfolio;
mod rank;
mod tree;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicI64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::{Decision, SetTimes};
pub use lns::{lns_relax, reoptimize, Neighborhood, PartialAssignment};
pub use portfolio::{root_lower_bound, solve, solve_exact};

use crate::engine::{DisjunctiveRules, DomainStore, Model};
use crate::instance::{Instance, Solution, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Depth-first branch-and-bound only.
    Exact,
    /// A first solution, then LNS until the limit.
    Lns,
    /// Branch-and-bound, then LNS interleaved with proof attempts.
    Auto,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Lns => "lns",
            Mode::Auto => "auto",
        })
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "lns" => Ok(Mode::Lns),
            "auto" => Ok(Mode::Auto),
            other => Err(ConfigError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown search mode {0:?} (expected exact, lns or auto)")]
    UnknownMode(String),
    #[error("time limit must be positive, got {0}")]
    TimeLimit(f64),
    #[error("worker count must be at least 1")]
    Workers,
    #[error("relax fraction must lie in [0, 1], got {0}")]
    RelaxFraction(f64),
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub workers: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Fails allowed per LNS re-optimization.
    pub lns_fail_limit: u64,
    /// Share of operations released per LNS iteration.
    pub relax_fraction: f64,
    /// Branch-and-bound nodes without improvement before switching to LNS
    /// in auto mode.
    pub lns_trigger_nodes: u64,
    pub rules: DisjunctiveRules,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            time_limit: 60.0,
            workers: 1,
            seed: 1,
            mode: Mode::Auto,
            lns_fail_limit: 200,
            relax_fraction: 0.15,
            lns_trigger_nodes: 5000,
            rules: DisjunctiveRules::ALL,
        }
    }
}

impl SearchConfig {
    /// 20 minutes per instance, the classic-benchmark protocol.
    pub fn classic() -> Self {
        Self {
            time_limit: 1200.0,
            ..Self::default()
        }
    }

    /// 6 hours per instance, the large-scale protocol.
    pub fn large() -> Self {
        Self {
            time_limit: 21600.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.time_limit.is_nan() || self.time_limit <= 0.0 {
            return Err(ConfigError::TimeLimit(self.time_limit));
        }
        if self.workers == 0 {
            return Err(ConfigError::Workers);
        }
        if !(0.0..=1.0).contains(&self.relax_fraction) {
            return Err(ConfigError::RelaxFraction(self.relax_fraction));
        }
        Ok(())
    }

    /// Short identifier used in reports.
    pub fn digest(&self) -> String {
        let mut d = format!("{}-w{}-s{}-t{}", self.mode, self.workers, self.seed, self.time_limit);
        if self.rules != DisjunctiveRules::ALL {
            d.push_str(&format!(
                "-ef{}-nfl{}",
                u8::from(self.rules.edge_finding),
                u8::from(self.rules.not_first_last)
            ));
        }
        d
    }

    pub fn time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit)
    }
}

/// Best solution found and the proven lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incumbent {
    pub best: Option<Solution>,
    pub bound: Time,
    /// The best solution is optimal.
    pub proven: bool,
}

impl Incumbent {
    pub fn makespan(&self) -> Option<Time> {
        self.best.as_ref().map(|s| s.makespan)
    }
}

/// One incumbent publication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub makespan: Time,
    /// Seconds since the start of the run.
    pub time: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub fails: u64,
    pub lns_iterations: u64,
    /// Seconds.
    pub wall_time: f64,
    /// Seconds until the final incumbent was published.
    pub time_to_best: f64,
    pub trace: Vec<TracePoint>,
}

/// Incumbent shared by all workers. A publication succeeds only when it is
/// strictly better than the current one.
pub(crate) struct SharedIncumbent {
    start: Instant,
    best: AtomicI64,
    state: Mutex<(Option<Solution>, Vec<TracePoint>)>,
    pub stop: AtomicBool,
    pub proven: AtomicBool,
}

impl SharedIncumbent {
    pub fn new(start: Instant) -> Self {
        Self {
            start,
            best: AtomicI64::new(Time::MAX),
            state: Mutex::new((None, Vec::new())),
            stop: AtomicBool::new(false),
            proven: AtomicBool::new(false),
        }
    }

    pub fn best_makespan(&self) -> Option<Time> {
        let b = self.best.load(Ordering::Acquire);
        (b != Time::MAX).then_some(b)
    }

    pub fn publish(&self, sol: Solution) -> bool {
        let mut state = self.state.lock().unwrap();
        if state.0.as_ref().is_some_and(|cur| cur.makespan <= sol.makespan) {
            return false;
        }
        let point = TracePoint {
            makespan: sol.makespan,
            time: self.start.elapsed().as_secs_f64(),
        };
        self.best.store(sol.makespan, Ordering::Release);
        state.0 = Some(sol);
        state.1.push(point);
        true
    }

    pub fn snapshot(&self) -> Option<Solution> {
        self.state.lock().unwrap().0.clone()
    }

    pub fn into_parts(self) -> (Option<Solution>, Vec<TracePoint>) {
        self.state.into_inner().unwrap()
    }
}

/// Reads the schedule out of a store where every op is fixed.
pub(crate) fn store_solution(inst: &Instance, store: &DomainStore) -> Solution {
    let model: &Model = store.model();
    let starts = (0..inst.num_jobs())
        .map(|j| model.job_ops(j).map(|op| store.est(op)).collect())
        .collect();
    Solution::from_starts(inst, starts)
}
