//! Instances with a known optimal makespan.
//!
//! Every machine timeline is first tiled without gaps on `[0, optimum)`,
//! then the segments are threaded into jobs so that the tiling itself is a
//! feasible schedule. Each machine then carries exactly `optimum` units of
//! work, so the machine-load bound equals the certificate makespan and the
//! optimum needs no search.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Job, Operation, Solution, Time};

pub const DEFAULT_OPTIMUM: Time = 600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Flavor {
    /// Few jobs with long operation chains.
    LongJobs,
    /// Many jobs with short operation chains.
    ShortJobs,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::LongJobs => "longJobs",
            Flavor::ShortJobs => "shortJobs",
        })
    }
}

impl FromStr for Flavor {
    type Err = GeneratorError;

    /// Accepts `long`, `short`, `longJobs` and `shortJobs`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "long" | "longJobs" => Ok(Flavor::LongJobs),
            "short" | "shortJobs" => Ok(Flavor::ShortJobs),
            other => Err(GeneratorError::UnknownFlavor(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("unknown flavor {0:?} (expected long or short)")]
    UnknownFlavor(String),
    #[error("need at least one machine")]
    NoMachines,
    #[error("{ops} operations cannot cover {machines} machines")]
    TooFewOps { ops: usize, machines: usize },
    #[error("duration bounds [{min}, {max}] are empty or non-positive")]
    DurationBounds { min: Time, max: Time },
    #[error("optimum {optimum} is below the maximum duration {max}")]
    OptimumBelowMaxDuration { optimum: Time, max: Time },
    #[error("machine {machine} gets {quota} operations of at least {min} units, more than the optimum {optimum}")]
    QuotaTooLarge {
        machine: usize,
        quota: usize,
        min: Time,
        optimum: Time,
    },
    #[error("new-chain probability {0} is outside [0, 1]")]
    Probability(f64),
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub flavor: Flavor,
    pub num_machines: usize,
    pub num_ops: usize,
    pub seed: u64,
    pub optimum: Time,
    pub min_dur: Time,
    pub max_dur: Time,
    /// Short jobs: chance of opening a new job even when an existing one
    /// could take the segment.
    pub new_chain_prob: f64,
    /// Short jobs: maximum operations per job; `None` means
    /// `ceil(2 * num_ops / num_machines)`.
    pub chain_cap: Option<usize>,
}

impl GeneratorSpec {
    pub fn new(flavor: Flavor, num_machines: usize, num_ops: usize, seed: u64) -> Self {
        Self {
            flavor,
            num_machines,
            num_ops,
            seed,
            optimum: DEFAULT_OPTIMUM,
            min_dur: 10,
            max_dur: 1000,
            new_chain_prob: 0.5,
            chain_cap: None,
        }
    }

    /// File stem used for written instances, e.g. `shortJobs-5-200-3`.
    pub fn name(&self) -> String {
        format!("{}-{}-{}-{}", self.flavor, self.num_machines, self.num_ops, self.seed)
    }

    pub fn chain_cap(&self) -> usize {
        self.chain_cap
            .unwrap_or_else(|| (2 * self.num_ops).div_ceil(self.num_machines.max(1)))
            .max(1)
    }

    fn check(&self) -> Result<(), GeneratorError> {
        if self.num_machines == 0 {
            return Err(GeneratorError::NoMachines);
        }
        if self.num_ops < self.num_machines {
            return Err(GeneratorError::TooFewOps {
                ops: self.num_ops,
                machines: self.num_machines,
            });
        }
        if self.min_dur < 1 || self.min_dur > self.max_dur {
            return Err(GeneratorError::DurationBounds {
                min: self.min_dur,
                max: self.max_dur,
            });
        }
        if self.optimum < self.max_dur {
            return Err(GeneratorError::OptimumBelowMaxDuration {
                optimum: self.optimum,
                max: self.max_dur,
            });
        }
        if !(0.0..=1.0).contains(&self.new_chain_prob) {
            return Err(GeneratorError::Probability(self.new_chain_prob));
        }
        Ok(())
    }
}

/// One busy interval of a machine timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub machine: usize,
    pub start: Time,
    pub duration: Time,
}

impl Segment {
    pub fn end(&self) -> Time {
        self.start + self.duration
    }
}

/// The witness schedule of a generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schedule: Solution,
    /// Every machine carries exactly `optimum` units of work.
    pub machine_load_ok: bool,
}

/// Splits `[0, optimum)` on every machine into abutting segments.
///
/// Operations are spread as evenly as possible, the remainder going to
/// random machines. Durations are drawn from `[min_dur, max_dur]` and
/// rescaled so each timeline sums to `optimum`; every segment keeps at
/// least `min_dur` units and the last one absorbs rounding. When the
/// quota is too small to fill the optimum with `max_dur`-long segments
/// the upper bound cannot hold and segments grow beyond it.
pub fn tile_machine_timelines<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Result<Vec<Vec<Segment>>, GeneratorError> {
    spec.check()?;
    let m = spec.num_machines;
    let mut quotas = vec![spec.num_ops / m; m];
    for i in sample(rng, m, spec.num_ops % m) {
        quotas[i] += 1;
    }
    for (machine, &quota) in quotas.iter().enumerate() {
        if quota as Time * spec.min_dur > spec.optimum {
            return Err(GeneratorError::QuotaTooLarge {
                machine,
                quota,
                min: spec.min_dur,
                optimum: spec.optimum,
            });
        }
    }

    Ok(quotas
        .iter()
        .enumerate()
        .map(|(machine, &quota)| {
            let raw: Vec<Time> = (0..quota).map(|_| rng.gen_range(spec.min_dur..=spec.max_dur)).collect();
            let raw_sum: i128 = raw.iter().map(|&d| d as i128).sum();
            let slack = (spec.optimum - quota as Time * spec.min_dur) as i128;
            let mut durations: Vec<Time> = raw
                .iter()
                .map(|&d| spec.min_dur + (d as i128 * slack / raw_sum) as Time)
                .collect();
            let rest = spec.optimum - durations.iter().sum::<Time>();
            *durations.last_mut().unwrap() += rest;

            let mut start = 0;
            durations
                .into_iter()
                .map(|duration| {
                    let seg = Segment {
                        machine,
                        start,
                        duration,
                    };
                    start += duration;
                    seg
                })
                .collect()
        })
        .collect())
}

struct Chain {
    segments: Vec<Segment>,
    open: bool,
}

impl Chain {
    fn available(&self) -> Time {
        self.segments.last().unwrap().end()
    }

    fn last_machine(&self) -> usize {
        self.segments.last().unwrap().machine
    }
}

/// Threads the segments of a tiling into chains (future jobs) whose
/// segments never overlap in time.
///
/// Segments are visited by start time. A segment joins the open chain that
/// became available last among those already free at its start; chains
/// ending on a different machine are preferred so jobs move between
/// machines. Long jobs always join a chain when one is free. Short jobs open
/// a new chain with probability `new_chain_prob` and close chains at
/// `chain_cap` segments. Chains are returned ordered by their first start.
pub fn chain_decompose<R: Rng>(tiles: &[Vec<Segment>], spec: &GeneratorSpec, rng: &mut R) -> Vec<Vec<Segment>> {
    let mut segments: Vec<Segment> = tiles.iter().flatten().copied().collect();
    segments.sort_by_key(|s| (s.start, s.machine));
    let cap = match spec.flavor {
        Flavor::LongJobs => usize::MAX,
        Flavor::ShortJobs => spec.chain_cap(),
    };

    let mut chains: Vec<Chain> = Vec::new();
    for seg in segments {
        let force_new = spec.flavor == Flavor::ShortJobs && rng.gen_bool(spec.new_chain_prob);
        let target = if force_new {
            None
        } else {
            chains
                .iter()
                .enumerate()
                .filter(|(_, c)| c.open && c.available() <= seg.start)
                .max_by_key(|(i, c)| (c.last_machine() != seg.machine, c.available(), std::cmp::Reverse(*i)))
                .map(|(i, _)| i)
        };
        let idx = match target {
            Some(i) => {
                chains[i].segments.push(seg);
                i
            }
            None => {
                chains.push(Chain {
                    segments: vec![seg],
                    open: true,
                });
                chains.len() - 1
            }
        };
        if chains[idx].segments.len() >= cap {
            chains[idx].open = false;
        }
    }
    // chains were created in order of their first segment
    chains.into_iter().map(|c| c.segments).collect()
}

/// Builds the instance and its certificate. Deterministic in `spec`.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<(Instance, Certificate), GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tiles = tile_machine_timelines(spec, &mut rng)?;
    let chains = chain_decompose(&tiles, spec, &mut rng);

    let jobs = chains
        .iter()
        .map(|chain| Job::new(chain.iter().map(|s| Operation::new(s.machine, s.duration)).collect()))
        .collect();
    let inst = Instance::new(spec.name(), spec.num_machines, jobs).expect("generated jobs are well formed");
    let starts = chains.iter().map(|c| c.iter().map(|s| s.start).collect()).collect();
    let schedule = Solution::from_starts(&inst, starts);
    let machine_load_ok = inst.machine_loads().iter().all(|&l| l == spec.optimum);
    Ok((
        inst,
        Certificate {
            schedule,
            machine_load_ok,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{lower_bound, validate_solution};

    fn tiny(flavor: Flavor) -> GeneratorSpec {
        GeneratorSpec {
            optimum: 10,
            min_dur: 1,
            max_dur: 9,
            ..GeneratorSpec::new(flavor, 1, 2, 7)
        }
    }

    #[test]
    fn two_segments_on_one_machine() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tiles = tile_machine_timelines(&tiny(Flavor::LongJobs), &mut rng).unwrap();
        assert_eq!(tiles.len(), 1);
        let t = &tiles[0];
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].start, 0);
        assert_eq!(t[1].start, t[0].end());
        assert_eq!(t[1].end(), 10);
    }

    #[test]
    fn long_jobs_attach_short_jobs_can_split() {
        let tiles = vec![vec![
            Segment {
                machine: 0,
                start: 0,
                duration: 6,
            },
            Segment {
                machine: 0,
                start: 6,
                duration: 4,
            },
        ]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(chain_decompose(&tiles, &tiny(Flavor::LongJobs), &mut rng).len(), 1);
        let forced = GeneratorSpec {
            new_chain_prob: 1.0,
            ..tiny(Flavor::ShortJobs)
        };
        let chains = chain_decompose(&tiles, &forced, &mut rng);
        assert_eq!(chains.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn generated_optimum_is_tight() {
        for flavor in [Flavor::LongJobs, Flavor::ShortJobs] {
            let spec = GeneratorSpec::new(flavor, 5, 200, 42);
            let (inst, cert) = generate_instance(&spec).unwrap();
            assert_eq!(inst.num_ops(), 200);
            assert_eq!(lower_bound(&inst), 600_000);
            assert_eq!(validate_solution(&inst, &cert.schedule), Ok(()));
            assert_eq!(cert.schedule.makespan, 600_000);
            assert!(cert.machine_load_ok);
            assert_eq!(generate_instance(&spec).unwrap().0, inst);
        }
    }

    #[test]
    fn short_jobs_respect_the_cap() {
        let spec = GeneratorSpec::new(Flavor::ShortJobs, 4, 100, 3);
        let (inst, _) = generate_instance(&spec).unwrap();
        assert!(inst.jobs.iter().all(|j| j.len() <= spec.chain_cap()));
        assert_eq!(spec.chain_cap(), 50);
    }

    #[test]
    fn spec_errors() {
        let few = GeneratorSpec::new(Flavor::LongJobs, 5, 4, 1);
        assert!(matches!(generate_instance(&few), Err(GeneratorError::TooFewOps { .. })));
        let crowded = GeneratorSpec {
            optimum: 100,
            max_dur: 50,
            ..GeneratorSpec::new(Flavor::LongJobs, 1, 20, 1)
        };
        assert!(matches!(
            generate_instance(&crowded),
            Err(GeneratorError::QuotaTooLarge { quota: 20, .. })
        ));
        assert_eq!("short".parse::<Flavor>(), Ok(Flavor::ShortJobs));
        assert!("medium".parse::<Flavor>().is_err());
    }
}
