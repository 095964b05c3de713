//! Standard JSSP text format.
//!
//! ```text
//! # optional comment lines
//! numJobs numMachines
//! m d m d ...          (one line per job, pairs of machine/duration)
//! k m d m d ...        (prefixed form: operation count first)
//! ```
//!
//! An even token count on a job line means plain pairs, an odd count means the
//! first token is the operation count. The writer uses the plain form for
//! rectangular instances and the prefixed form otherwise.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::instance::{Instance, Job, ModelError, Operation, Time};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: job line has {count} tokens, expected an even count of machine/duration pairs (or an operation count followed by that many pairs)")]
    OddTokenCount { line: usize, count: usize },
    #[error("line {line}: invalid integer {token:?}")]
    BadInteger { line: usize, token: String },
    #[error("line {line}: machine {machine} out of range (instance has {num_machines} machines)")]
    MachineOutOfRange {
        line: usize,
        machine: i64,
        num_machines: usize,
    },
    #[error("line {line}: non-positive duration {duration}")]
    NonPositiveDuration { line: usize, duration: i64 },
    #[error("line {line}: empty job")]
    EmptyJob { line: usize },
    #[error("expected {expected} job lines, found {found}")]
    JobCount { expected: usize, found: usize },
    #[error("line {line}: unexpected content after the last job")]
    TrailingContent { line: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_int(line: usize, token: &str) -> Result<i64, ParseError> {
    token.parse().map_err(|_| ParseError::BadInteger {
        line,
        token: token.to_string(),
    })
}

/// How zero-length operations in a file are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDurations {
    /// Report them as a parse error.
    #[default]
    Reject,
    /// Remove them from their job. A zero-length op never occupies its
    /// machine and passes precedence straight through, so the optimal
    /// makespan is unchanged. Jobs left empty are removed as well.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    pub zero_durations: ZeroDurations,
}

/// Parses an instance with an empty name.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    parse_instance_named("", text)
}

pub fn parse_instance_named(name: &str, text: &str) -> Result<Instance, ParseError> {
    parse_instance_with(name, text, ParseOptions::default())
}

pub fn parse_instance_with(name: &str, text: &str, options: ParseOptions) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let htoks: Vec<&str> = header.split_whitespace().collect();
    if htoks.len() != 2 {
        return Err(ParseError::Header {
            line: hline,
            reason: format!("expected `numJobs numMachines`, found {} tokens", htoks.len()),
        });
    }
    let num_jobs = parse_int(hline, htoks[0])?;
    let num_machines = parse_int(hline, htoks[1])?;
    if num_jobs < 0 || num_machines <= 0 {
        return Err(ParseError::Header {
            line: hline,
            reason: format!("invalid sizes {num_jobs} x {num_machines}"),
        });
    }
    let (num_jobs, num_machines) = (num_jobs as usize, num_machines as usize);

    let mut jobs = Vec::with_capacity(num_jobs);
    let mut seen = 0;
    for (line, content) in lines {
        if seen == num_jobs {
            return Err(ParseError::TrailingContent { line });
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let pairs = if toks.len().is_multiple_of(2) {
            &toks[..]
        } else {
            let count = parse_int(line, toks[0])?;
            if count < 0 || (count as usize) * 2 != toks.len() - 1 {
                return Err(ParseError::OddTokenCount {
                    line,
                    count: toks.len(),
                });
            }
            &toks[1..]
        };
        if pairs.is_empty() {
            return Err(ParseError::EmptyJob { line });
        }
        let mut ops = Vec::with_capacity(pairs.len() / 2);
        for pair in pairs.chunks(2) {
            let machine = parse_int(line, pair[0])?;
            let duration: Time = parse_int(line, pair[1])?;
            if machine < 0 || machine as usize >= num_machines {
                return Err(ParseError::MachineOutOfRange {
                    line,
                    machine,
                    num_machines,
                });
            }
            if duration == 0 && options.zero_durations == ZeroDurations::Drop {
                continue;
            }
            if duration <= 0 {
                return Err(ParseError::NonPositiveDuration { line, duration });
            }
            ops.push(Operation::new(machine as usize, duration));
        }
        jobs.push(Job::new(ops));
        seen += 1;
    }
    if seen != num_jobs {
        return Err(ParseError::JobCount {
            expected: num_jobs,
            found: seen,
        });
    }
    jobs.retain(|j| !j.is_empty());
    Ok(Instance::new(name, num_machines, jobs)?)
}

/// Reads an instance file; the file stem becomes the instance name.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, ParseError> {
    read_instance_with(path, ParseOptions::default())
}

pub fn read_instance_with(path: impl AsRef<Path>, options: ParseOptions) -> Result<Instance, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_instance_with(&name, &text, options)
}

pub fn write_instance(inst: &Instance) -> String {
    let prefixed = !inst.is_rectangular();
    let mut out = String::new();
    writeln!(out, "{} {}", inst.num_jobs(), inst.num_machines).unwrap();
    for job in &inst.jobs {
        let mut first = true;
        if prefixed {
            write!(out, "{}", job.len()).unwrap();
            first = false;
        }
        for op in &job.ops {
            if !first {
                out.push(' ');
            }
            write!(out, "{} {}", op.machine, op.duration).unwrap();
            first = false;
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance() {
        let inst = parse_instance("1 1\n0 5").unwrap();
        assert_eq!(inst.num_jobs(), 1);
        assert_eq!(inst.num_machines, 1);
        assert_eq!(inst.jobs[0].ops, vec![Operation::new(0, 5)]);
        assert_eq!(write_instance(&inst), "1 1\n0 5\n");
    }

    #[test]
    fn odd_token_count_is_rejected() {
        let err = parse_instance("2 2\n0 3 1").unwrap_err();
        assert!(matches!(err, ParseError::OddTokenCount { line: 2, count: 3 }), "{err}");
    }

    #[test]
    fn comments_and_whitespace() {
        let inst = parse_instance("# hello\n\n  2   1 \n# job 0\n0\t4\n 0 2  \n").unwrap();
        assert_eq!(inst.num_jobs(), 2);
        assert_eq!(inst.jobs[1].ops[0].duration, 2);
    }

    #[test]
    fn prefixed_lines() {
        let inst = parse_instance("2 2\n1 0 4\n3 0 1 1 2 0 3\n").unwrap();
        assert_eq!(inst.jobs[0].len(), 1);
        assert_eq!(inst.jobs[1].len(), 3);
        assert!(inst.has_recirculation());
        let text = write_instance(&inst);
        assert_eq!(text, "2 2\n1 0 4\n3 0 1 1 2 0 3\n");
    }

    #[test]
    fn zero_durations() {
        let text = "2 2\n0 3 1 0\n1 0 0 2\n";
        assert!(matches!(
            parse_instance(text).unwrap_err(),
            ParseError::NonPositiveDuration { line: 2, duration: 0 }
        ));
        let opts = ParseOptions {
            zero_durations: ZeroDurations::Drop,
        };
        let inst = parse_instance_with("z", text, opts).unwrap();
        assert_eq!(inst.jobs[0].ops, vec![Operation::new(0, 3)]);
        assert_eq!(inst.jobs[1].ops, vec![Operation::new(0, 2)]);
        let dropped = parse_instance_with("z", "2 1\n0 0\n0 4\n", opts).unwrap();
        assert_eq!(dropped.num_jobs(), 1);
        // the 0-pair still counts as a job line
        assert!(parse_instance_with("z", "2 1\n0 0\n", opts).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse_instance("1 2\n0 1 2 3").unwrap_err(),
            ParseError::MachineOutOfRange {
                line: 2,
                machine: 2,
                ..
            }
        ));
        assert!(matches!(
            parse_instance("# c\n1 1\n0 0").unwrap_err(),
            ParseError::NonPositiveDuration { line: 3, duration: 0 }
        ));
        assert!(matches!(
            parse_instance("1 1\n0 -4").unwrap_err(),
            ParseError::NonPositiveDuration { line: 2, .. }
        ));
        assert!(matches!(
            parse_instance("1\n0 5").unwrap_err(),
            ParseError::Header { line: 1, .. }
        ));
        assert!(matches!(
            parse_instance("x 1\n0 5").unwrap_err(),
            ParseError::BadInteger { line: 1, .. }
        ));
        assert!(matches!(
            parse_instance("2 1\n0 5").unwrap_err(),
            ParseError::JobCount { expected: 2, found: 1 }
        ));
        assert!(matches!(
            parse_instance("1 1\n0 5\n0 5").unwrap_err(),
            ParseError::TrailingContent { line: 3 }
        ));
        assert!(matches!(
            parse_instance("# only\n").unwrap_err(),
            ParseError::MissingHeader
        ));
    }
}
