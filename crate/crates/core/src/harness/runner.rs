//! Batch runs over a manifest of instances and solver configurations.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! instances = ["ft06.jss", "la01.jss"]   # relative to the manifest
//! zero_durations = "drop"                # optional, default "reject"
//!
//! [[config]]                             # optional, default: one config
//! workers = 1
//! seed = 7
//! mode = "auto"
//! time_limit = 30                        # overrides the preset
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::score::RunResult;
use crate::engine::DisjunctiveRules;
use crate::format::{read_instance_with, ParseOptions, ZeroDurations};
use crate::instance::{validate_solution, Solution, Time};
use crate::search::{solve, Mode, SearchConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read manifest {path}: {source}")]
    ReadManifest {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Manifest {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration #{index}: {reason}")]
    Config { index: usize, reason: String },
    #[error("unknown preset {0:?} (expected classic or large)")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Time-limit protocol applied to configurations that set none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 20 minutes per instance.
    #[default]
    Classic,
    /// 6 hours per instance.
    Large,
}

impl Preset {
    pub fn config(self) -> SearchConfig {
        match self {
            Preset::Classic => SearchConfig::classic(),
            Preset::Large => SearchConfig::large(),
        }
    }
}

impl FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classic" => Ok(Preset::Classic),
            "large" => Ok(Preset::Large),
            other => Err(BenchError::UnknownPreset(other.to_string())),
        }
    }
}

/// Per-configuration overrides of the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEntry {
    pub time_limit: Option<f64>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub lns_fail_limit: Option<u64>,
    pub relax_fraction: Option<f64>,
    pub lns_trigger_nodes: Option<u64>,
    pub edge_finding: Option<bool>,
    pub not_first_last: Option<bool>,
}

impl ConfigEntry {
    pub fn resolve(&self, preset: Preset) -> SearchConfig {
        let base = preset.config();
        SearchConfig {
            time_limit: self.time_limit.unwrap_or(base.time_limit),
            workers: self.workers.unwrap_or(base.workers),
            seed: self.seed.unwrap_or(base.seed),
            mode: self.mode.unwrap_or(base.mode),
            lns_fail_limit: self.lns_fail_limit.unwrap_or(base.lns_fail_limit),
            relax_fraction: self.relax_fraction.unwrap_or(base.relax_fraction),
            lns_trigger_nodes: self.lns_trigger_nodes.unwrap_or(base.lns_trigger_nodes),
            rules: DisjunctiveRules {
                edge_finding: self.edge_finding.unwrap_or(base.rules.edge_finding),
                not_first_last: self.not_first_last.unwrap_or(base.rules.not_first_last),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default, rename = "config")]
    pub configs: Vec<ConfigEntry>,
    #[serde(default)]
    pub zero_durations: ZeroDurations,
}

impl Manifest {
    /// Reads a manifest; instance paths become relative to its directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::ReadManifest {
            path: path.display().to_string(),
            source,
        })?;
        let mut manifest: Manifest = toml::from_str(&text).map_err(|source| BenchError::Manifest {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in &mut manifest.instances {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(manifest)
    }

    /// The configurations to run, resolved against `preset`.
    pub fn search_configs(&self, preset: Preset) -> Result<Vec<SearchConfig>, BenchError> {
        let entries = if self.configs.is_empty() {
            vec![ConfigEntry::default()]
        } else {
            self.configs.clone()
        };
        entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                let cfg = e.resolve(preset);
                cfg.validate().map_err(|err| BenchError::Config {
                    index,
                    reason: err.to_string(),
                })?;
                Ok(cfg)
            })
            .collect()
    }
}

/// A result row plus the details that do not fit the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub result: RunResult,
    pub bound: Option<Time>,
    pub nodes: u64,
    pub fails: u64,
    pub lns_iterations: u64,
    /// Why the run produced nothing usable.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
}

impl BenchReport {
    pub fn results(&self) -> Vec<RunResult> {
        self.records.iter().map(|r| r.result.clone()).collect()
    }

    /// Instances as rows, configurations as columns; each cell is the
    /// makespan, followed by the solve time in parentheses when proven.
    pub fn text_table(&self) -> String {
        let mut configs: Vec<&str> = Vec::new();
        let mut instances: Vec<&str> = Vec::new();
        for r in &self.records {
            if !configs.contains(&r.result.config.as_str()) {
                configs.push(&r.result.config);
            }
            if !instances.contains(&r.result.instance.as_str()) {
                instances.push(&r.result.instance);
            }
        }
        let cell = |inst: &str, cfg: &str| -> String {
            let Some(rec) = self
                .records
                .iter()
                .find(|r| r.result.instance == inst && r.result.config == cfg)
            else {
                return "-".into();
            };
            let r = &rec.result;
            match (r.makespan, r.valid) {
                (Some(_), false) => "invalid".into(),
                (None, false) => "error".into(),
                (None, _) => "No Solution".into(),
                (Some(m), true) if r.proven => format!("{m} ({:.1})", r.wall_time),
                (Some(m), true) => m.to_string(),
            }
        };
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("instance".to_string())
            .chain(configs.iter().map(|c| c.to_string()))
            .collect()];
        for inst in &instances {
            rows.push(
                std::iter::once(inst.to_string())
                    .chain(configs.iter().map(|c| cell(inst, c)))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..=configs.len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, &w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        out
    }
}

fn run_one(path: &Path, opts: ParseOptions, cfg: &SearchConfig) -> (RunRecord, Option<Solution>) {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut record = RunRecord {
        result: RunResult {
            instance: name,
            config: cfg.digest(),
            makespan: None,
            proven: false,
            wall_time: 0.0,
            time_to_best: 0.0,
            valid: false,
        },
        bound: None,
        nodes: 0,
        fails: 0,
        lns_iterations: 0,
        error: None,
    };
    let inst = match read_instance_with(path, opts) {
        Ok(inst) => inst,
        Err(e) => {
            record.error = Some(e.to_string());
            return (record, None);
        }
    };
    let (inc, stats) = match catch_unwind(AssertUnwindSafe(|| solve(&inst, cfg))) {
        Ok(out) => out,
        Err(_) => {
            record.error = Some("solver panicked".into());
            return (record, None);
        }
    };
    let r = &mut record.result;
    r.wall_time = stats.wall_time;
    r.time_to_best = stats.time_to_best;
    record.nodes = stats.nodes;
    record.fails = stats.fails;
    record.lns_iterations = stats.lns_iterations;
    record.bound = Some(inc.bound);
    match &inc.best {
        Some(sol) => {
            r.makespan = Some(sol.makespan);
            match validate_solution(&inst, sol) {
                Ok(()) => {
                    r.valid = true;
                    r.proven = inc.proven;
                }
                Err(v) => record.error = Some(format!("solution rejected: {v}")),
            }
        }
        None => r.valid = true,
    }
    (record, inc.best)
}

/// Runs every (instance, configuration) cell of `manifest` and writes
/// `results.csv` (streamed row by row), `results.json`, `table.txt` and one
/// solution file per cell under `solutions/` into `out_dir`.
///
/// Failures of single runs are recorded in their rows; only I/O errors on
/// the output abort the batch. `progress` sees each record as it lands.
pub fn run_benchmark(
    manifest: &Manifest,
    preset: Preset,
    out_dir: &Path,
    mut progress: impl FnMut(&RunRecord),
) -> Result<BenchReport, BenchError> {
    let configs = manifest.search_configs(preset)?;
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| BenchError::Io { path, source }
    };
    let solutions_dir = out_dir.join("solutions");
    fs::create_dir_all(&solutions_dir).map_err(io(&solutions_dir))?;
    let csv_path = out_dir.join("results.csv");
    let mut csv = csv::Writer::from_path(&csv_path).map_err(|source| BenchError::Csv {
        path: csv_path.display().to_string(),
        source,
    })?;
    if manifest.instances.is_empty() {
        // no rows would leave the file without its header
        csv.write_record([
            "instance",
            "config",
            "makespan",
            "proven",
            "wall_time_s",
            "time_to_best_s",
            "valid",
        ])
        .map_err(|source| BenchError::Csv {
            path: csv_path.display().to_string(),
            source,
        })?;
    }

    let opts = ParseOptions {
        zero_durations: manifest.zero_durations,
    };
    let mut report = BenchReport::default();
    for path in &manifest.instances {
        for cfg in &configs {
            let (record, best) = run_one(path, opts, cfg);
            csv.serialize(&record.result)
                .and_then(|()| csv.flush().map_err(csv::Error::from))
                .map_err(|source| BenchError::Csv {
                    path: csv_path.display().to_string(),
                    source,
                })?;
            if let Some(sol) = best {
                let file = solutions_dir.join(format!("{}__{}.json", record.result.instance, record.result.config));
                fs::write(&file, sol.to_json()).map_err(io(&file))?;
            }
            progress(&record);
            report.records.push(record);
        }
    }
    csv.flush().map_err(io(&csv_path))?;

    let json_path = out_dir.join("results.json");
    let json = serde_json::to_string_pretty(&report.records).expect("records serialize");
    fs::write(&json_path, json + "\n").map_err(io(&json_path))?;
    let table_path = out_dir.join("table.txt");
    let mut f = fs::File::create(&table_path).map_err(io(&table_path))?;
    f.write_all(report.text_table().as_bytes()).map_err(io(&table_path))?;
    Ok(report)
}
