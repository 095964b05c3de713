//! Benchmark harness: brute-force oracle, reference results, scoring and
//! batch runs with reports.

pub mod expected;
pub mod oracle;
pub mod runner;
pub mod score;

pub use oracle::{brute_force_optimum, OracleError};
pub use runner::{run_benchmark, BenchError, BenchReport, ConfigEntry, Manifest, Preset, RunRecord};
pub use score::{pair_points, read_results_csv, score_complete, write_results_csv, RunResult, ScoreError, ScoreTable};
