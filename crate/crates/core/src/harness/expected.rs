//! Published reference results for the classic and large-scale benchmarks.
//!
//! Each row is one solver configuration on one instance. Classic rows carry
//! a solve time only when the makespan was proven optimal. Large-scale rows
//! may lack a makespan ("No Solution"), and one row is marked untrusted and
//! is left out of every comparison.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::instance::Time;

const TABLE1: &str = include_str!("../../data/table1.csv");
const TABLE2: &str = include_str!("../../data/table2.csv");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExpectedRow {
    pub instance: String,
    /// `cpo_single`, `ort_single`, `cpo_quad` or `ort_quad`.
    pub solver: String,
    pub makespan: Option<Time>,
    /// Seconds; on classic rows present only for proven optima.
    pub time_s: Option<f64>,
    #[serde(default = "yes")]
    pub trusted: bool,
}

fn yes() -> bool {
    true
}

fn load(text: &str) -> Vec<ExpectedRow> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .expect("bundled reference table is well formed")
}

/// Classic benchmark rows.
pub fn classic() -> &'static [ExpectedRow] {
    static ROWS: OnceLock<Vec<ExpectedRow>> = OnceLock::new();
    ROWS.get_or_init(|| load(TABLE1))
}

/// Large-scale benchmark rows, untrusted ones included.
pub fn large() -> &'static [ExpectedRow] {
    static ROWS: OnceLock<Vec<ExpectedRow>> = OnceLock::new();
    ROWS.get_or_init(|| load(TABLE2))
}

/// Optimal makespan of a classic instance, if some configuration proved it.
pub fn proven_optimum(instance: &str) -> Option<Time> {
    classic()
        .iter()
        .filter(|r| r.instance == instance && r.time_s.is_some())
        .filter_map(|r| r.makespan)
        .min()
}

/// Best trusted makespan reported for an instance of either benchmark.
pub fn best_known(instance: &str) -> Option<Time> {
    classic()
        .iter()
        .chain(large())
        .filter(|r| r.instance == instance && r.trusted)
        .filter_map(|r| r.makespan)
        .min()
}
