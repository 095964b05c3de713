//! Run results and pairwise challenge scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Time;

/// Outcome of one solver run on one instance; one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub instance: String,
    /// Digest of the search configuration.
    pub config: String,
    /// `None` when no solution was found.
    pub makespan: Option<Time>,
    pub proven: bool,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    #[serde(rename = "time_to_best_s")]
    pub time_to_best: f64,
    /// The reported solution passed the independent checker.
    pub valid: bool,
}

impl RunResult {
    /// Makespan that counts for scoring: rows that failed the checker count
    /// as having no solution.
    pub fn scored_makespan(&self) -> Option<Time> {
        self.makespan.filter(|_| self.valid)
    }
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scoring needs at least two configurations, got {0}")]
    TooFewConfigs(usize),
    #[error("configuration {config} has {count} rows for instance {instance}")]
    DuplicateRow {
        config: String,
        instance: String,
        count: usize,
    },
    #[error("configurations {a} and {b} were run on different instance sets")]
    MismatchedInstances { a: String, b: String },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Points per configuration, with the per-instance breakdown.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreTable {
    pub totals: BTreeMap<String, f64>,
    /// `instance -> config -> points`.
    pub per_instance: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ScoreTable {
    pub fn total(&self, config: &str) -> Option<f64> {
        self.totals.get(config).copied()
    }

    pub fn points(&self, instance: &str, config: &str) -> Option<f64> {
        self.per_instance.get(instance)?.get(config).copied()
    }
}

/// Points for `a` and `b` on one instance.
///
/// A strictly smaller makespan (or any solution against none) takes the
/// point. Equal makespans split it in inverse proportion to time-to-best;
/// two zero times split evenly. Two runs without a solution get nothing.
pub fn pair_points(a: &RunResult, b: &RunResult) -> (f64, f64) {
    match (a.scored_makespan(), b.scored_makespan()) {
        (None, None) => (0.0, 0.0),
        (Some(_), None) => (1.0, 0.0),
        (None, Some(_)) => (0.0, 1.0),
        (Some(x), Some(y)) if x < y => (1.0, 0.0),
        (Some(x), Some(y)) if x > y => (0.0, 1.0),
        _ => {
            let (ta, tb) = (a.time_to_best.max(0.0), b.time_to_best.max(0.0));
            if ta + tb == 0.0 {
                (0.5, 0.5)
            } else {
                (tb / (ta + tb), ta / (ta + tb))
            }
        }
    }
}

/// Scores every unordered pair of configurations on every instance.
pub fn score_complete(results: &[RunResult]) -> Result<ScoreTable, ScoreError> {
    let mut by_config: BTreeMap<&str, BTreeMap<&str, Vec<&RunResult>>> = BTreeMap::new();
    for r in results {
        by_config
            .entry(&r.config)
            .or_default()
            .entry(&r.instance)
            .or_default()
            .push(r);
    }
    if by_config.len() < 2 {
        return Err(ScoreError::TooFewConfigs(by_config.len()));
    }
    for (config, rows) in &by_config {
        if let Some((instance, dup)) = rows.iter().find(|(_, v)| v.len() > 1) {
            return Err(ScoreError::DuplicateRow {
                config: config.to_string(),
                instance: instance.to_string(),
                count: dup.len(),
            });
        }
    }
    let configs: Vec<&str> = by_config.keys().copied().collect();
    let instances: BTreeSet<&str> = by_config[configs[0]].keys().copied().collect();
    for c in &configs[1..] {
        if by_config[c].keys().copied().collect::<BTreeSet<_>>() != instances {
            return Err(ScoreError::MismatchedInstances {
                a: configs[0].to_string(),
                b: c.to_string(),
            });
        }
    }

    let mut table = ScoreTable::default();
    for c in &configs {
        table.totals.insert(c.to_string(), 0.0);
    }
    for inst in &instances {
        let row = table.per_instance.entry(inst.to_string()).or_default();
        for c in &configs {
            row.insert(c.to_string(), 0.0);
        }
        for (i, a) in configs.iter().enumerate() {
            for b in &configs[i + 1..] {
                let (pa, pb) = pair_points(by_config[a][inst][0], by_config[b][inst][0]);
                *row.get_mut(*a).unwrap() += pa;
                *row.get_mut(*b).unwrap() += pb;
            }
        }
        for (c, p) in row.iter() {
            *table.totals.get_mut(c).unwrap() += p;
        }
    }
    Ok(table)
}

pub fn write_results_csv(path: &Path, results: &[RunResult]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<RunResult>, ScoreError> {
    let wrap = |source| ScoreError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize().collect::<Result<_, _>>().map_err(wrap)
}
