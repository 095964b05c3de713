//! Constraint-based job-shop scheduling.
//!
//! - [`instance`]: data model, lower bound and solution checker
//! - [`format`]: the standard text format
//! - [`engine`]: interval domain store and propagation
//! - [`search`]: branch-and-bound, LNS and the multi-worker portfolio
//! - [`generator`]: instances with a known optimal makespan
//! - [`harness`]: brute-force oracle, scoring and benchmark runs

pub mod engine;
pub mod format;
pub mod generator;
pub mod harness;
pub mod instance;
pub mod search;

pub use engine::{DisjunctiveRules, DomainStore, Inconsistency, IntervalVar, MachinePosting, Model, OpId};
pub use format::{
    parse_instance, parse_instance_named, parse_instance_with, read_instance, read_instance_with, write_instance,
    ParseError, ParseOptions, ZeroDurations,
};
pub use instance::{lower_bound, validate_solution, Instance, Job, Operation, Solution, Time, Violation};
