//! Shared fixtures for the criterion benchmarks.

use std::path::PathBuf;

use jobshop::{read_instance_with, Instance, ParseOptions, ZeroDurations};

/// Loads one of the bundled classic instances by name (e.g. `"ft06"`),
/// dropping zero-length operations.
pub fn classic(name: &str) -> Instance {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "data",
        "classic",
        &format!("{name}.jss"),
    ]
    .iter()
    .collect();
    let opts = ParseOptions {
        zero_durations: ZeroDurations::Drop,
    };
    read_instance_with(&path, opts).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
