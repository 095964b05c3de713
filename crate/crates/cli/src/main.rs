use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use jobshop::generator::{generate_instance, Flavor, GeneratorSpec};
use jobshop::harness::{read_results_csv, run_benchmark, score_complete, Manifest, Preset};
use jobshop::search::{solve, Mode, SearchConfig};
use jobshop::{read_instance_with, write_instance, ParseOptions, ZeroDurations};

#[derive(Parser)]
#[command(
    name = "jobshop",
    version,
    about = "Job-shop scheduling solver, generator and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve {
        file: PathBuf,
        /// Wall-clock limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Print the solution as JSON instead of a summary.
        #[arg(long)]
        json: bool,
        /// Drop zero-length operations instead of rejecting the file.
        #[arg(long)]
        drop_zero_durations: bool,
    },
    /// Run every instance of a manifest under every configuration.
    Bench {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PresetArg::Classic)]
        preset: PresetArg,
    },
    /// Generate an instance with optimal makespan known by construction.
    Gen {
        #[arg(long, value_enum)]
        flavor: FlavorArg,
        #[arg(long)]
        machines: usize,
        #[arg(long)]
        ops: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600_000)]
        optimum: i64,
        #[arg(long, default_value_t = 10)]
        min_dur: i64,
        #[arg(long, default_value_t = 1000)]
        max_dur: i64,
    },
    /// Pairwise challenge scores over one or more result files.
    Score {
        #[arg(required = true)]
        results: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Lns,
    Auto,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Lns => Mode::Lns,
            ModeArg::Auto => Mode::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Classic,
    Large,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Long,
    Short,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            file,
            time_limit,
            workers,
            seed,
            mode,
            json,
            drop_zero_durations,
        } => {
            let opts = ParseOptions {
                zero_durations: if drop_zero_durations {
                    ZeroDurations::Drop
                } else {
                    ZeroDurations::Reject
                },
            };
            let inst = read_instance_with(&file, opts)?;
            let cfg = SearchConfig {
                time_limit,
                workers,
                seed,
                mode: mode.into(),
                ..SearchConfig::default()
            };
            cfg.validate()?;
            let (inc, stats) = solve(&inst, &cfg);
            if json {
                match &inc.best {
                    Some(sol) => println!("{}", sol.to_json()),
                    None => bail!("no solution found within {time_limit} s"),
                }
            } else {
                println!("instance     {}", inst.name);
                match inc.makespan() {
                    Some(m) => println!("makespan     {m}"),
                    None => println!("makespan     none"),
                }
                println!("proven       {}", inc.proven);
                println!("lower bound  {}", inc.bound);
                println!("wall time    {:.3} s", stats.wall_time);
                println!("time to best {:.3} s", stats.time_to_best);
                println!("nodes        {}", stats.nodes);
                println!("fails        {}", stats.fails);
                println!("lns iters    {}", stats.lns_iterations);
            }
        }
        Command::Bench { manifest, out, preset } => {
            let m = Manifest::load(&manifest)?;
            let preset = match preset {
                PresetArg::Classic => Preset::Classic,
                PresetArg::Large => Preset::Large,
            };
            let report = run_benchmark(&m, preset, &out, |rec| {
                let r = &rec.result;
                let ms = r.makespan.map_or("none".to_string(), |m| m.to_string());
                let note = rec.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default();
                eprintln!(
                    "{} {} makespan={ms} proven={} time={:.2}s{note}",
                    r.instance, r.config, r.proven, r.wall_time
                );
            })?;
            print!("{}", report.text_table());
        }
        Command::Gen {
            flavor,
            machines,
            ops,
            seed,
            out,
            optimum,
            min_dur,
            max_dur,
        } => {
            let flavor = match flavor {
                FlavorArg::Long => Flavor::LongJobs,
                FlavorArg::Short => Flavor::ShortJobs,
            };
            let spec = GeneratorSpec {
                optimum,
                min_dur,
                max_dur,
                ..GeneratorSpec::new(flavor, machines, ops, seed)
            };
            let (inst, cert) = generate_instance(&spec)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let stem = spec.name();
            let jss = out.join(format!("{stem}.jss"));
            write(&jss, &write_instance(&inst))?;
            write(
                &out.join(format!("{stem}.cert.json")),
                &(cert.schedule.to_json() + "\n"),
            )?;
            println!(
                "{} jobs={} ops={} machines={} optimum={} recirculation={}",
                jss.display(),
                inst.num_jobs(),
                inst.num_ops(),
                inst.num_machines,
                spec.optimum,
                inst.has_recirculation()
            );
        }
        Command::Score { results } => {
            let mut rows = Vec::new();
            for path in &results {
                rows.extend(read_results_csv(path)?);
            }
            let table = score_complete(&rows)?;
            let width = table.totals.keys().map(String::len).max().unwrap_or(0).max(6);
            println!("{:<width$}  points", "config");
            for (config, points) in &table.totals {
                println!("{config:<width$}  {points:.2}");
            }
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
