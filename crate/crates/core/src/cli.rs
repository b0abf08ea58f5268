//! Command-line front end. Exit codes: 0 success, 1 failed verification or
//! illegal schedule, 2 bad input.

use crate::bench::{cmd_bench, cmd_tune, BenchSuite, SweepSpec};
use crate::engine::{
    compare_runs, run, run_with_plan, validate_config, write_snapshot, RunConfig, RunOutput, ScheduleConfig,
    THREADS_ENV,
};
use crate::error::{Error, Result};
use crate::schedule::{Plan, ValidationReport};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "stencil-tb",
    version,
    about = "Wavefront temporal blocking for FD wave propagators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured precision (32 or 64).
    #[arg(long)]
    pub precision: Option<u32>,
    /// Worker threads; falls back to the config, then all cores.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Override the seed of randomly placed sources.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one propagation and print its report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Write the final wavefield(s) as raw snapshots.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Write the report and receiver data as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the configured schedule against the naive one.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Relative L-infinity tolerance; 1e-6 for 32-bit, 1e-12 for 64-bit by default.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Reduce the wavefront skew by one (checks that the validator notices).
        #[arg(long)]
        under_skew: bool,
        /// Write the per-field differences as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep tile, block, and time-height candidates.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Candidate tiles, blocks, and time heights (JSON).
        #[arg(long)]
        sweep: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite of speedup measurements (the config is a suite file).
    Bench {
        /// Benchmark suite (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for every entry.
        #[arg(long, env = THREADS_ENV)]
        threads: Option<usize>,
        /// Speedup CSV destination; the density CSV goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the configured schedule for dependence violations without running it.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Reduce the wavefront skew by one before checking.
        #[arg(long)]
        under_skew: bool,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut c = RunConfig::load(&common.config)?;
    if let Some(p) = common.precision {
        c.precision = p;
    }
    if common.threads.is_some() {
        c.threads = common.threads;
    }
    if let (Some(seed), Some(r)) = (common.seed, c.random_sources.as_mut()) {
        r.seed = seed;
    }
    c.validate()?;
    Ok(c)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn plan_for(config: &RunConfig, under_skew: bool) -> Result<Plan> {
    let plan = config.plan()?;
    Ok(match plan {
        Plan::Wavefront(p) if under_skew => Plan::Wavefront(p.under_skewed()),
        p if under_skew => {
            return Err(Error::InvalidPlan(format!(
                "--under-skew needs a wavefront schedule, got {}",
                p.name()
            )))
        }
        p => p,
    })
}

fn print_validation(plan: &Plan, report: &ValidationReport) {
    println!("validator: {plan}");
    if report.is_legal() {
        println!("validator: legal (0 violations)");
        return;
    }
    println!("validator: {} violations", report.total);
    for v in report.violations.iter().take(5) {
        println!("  {v}");
    }
}

fn snapshot_paths(base: &Path, out: &RunOutput) -> Vec<PathBuf> {
    if out.fields.len() == 1 {
        return vec![base.to_path_buf()];
    }
    let stem = base
        .file_stem()
        .map_or("snapshot".into(), |s| s.to_string_lossy().into_owned());
    let ext = base
        .extension()
        .map_or("bin".into(), |s| s.to_string_lossy().into_owned());
    out.fields
        .iter()
        .map(|f| base.with_file_name(format!("{stem}.{}.{ext}", f.name)))
        .collect()
}

fn output_json(out: &RunOutput) -> String {
    serde_json::json!({
        "report": out.report,
        "n_receivers": out.n_receivers,
        "receivers": out.receivers,
    })
    .to_string()
}

fn exec(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { common, snapshot, out } => {
            let config = load(&common)?;
            let output = run(&config)?;
            println!("{}", output.report);
            if let Some(base) = snapshot {
                for (f, p) in output.fields.iter().zip(snapshot_paths(&base, &output)) {
                    write_snapshot(&p, f)?;
                    println!("snapshot: {} -> {}", f.name, p.display());
                }
            }
            if let Some(p) = out {
                std::fs::write(p, output_json(&output))?;
            }
            Ok(0)
        }
        Command::Verify {
            common,
            tolerance,
            under_skew,
            out,
        } => {
            let config = load(&common)?;
            let plan = plan_for(&config, under_skew)?;
            let (_, report) = validate_config(&config, &plan)?;
            print_validation(&plan, &report);
            if !report.is_legal() {
                return Ok(1);
            }
            let tol = tolerance.unwrap_or(if config.precision == 32 { 1e-6 } else { 1e-12 });
            let mut naive = config.clone();
            naive.schedule = ScheduleConfig::naive();
            let a = run(&naive)?;
            let b = run_with_plan(&config, &plan)?;
            let cmp = compare_runs(&a, &b, tol)?;
            println!("{cmp}");
            if let Some(p) = out {
                std::fs::write(p, serde_json::to_string_pretty(&cmp)?)?;
            }
            Ok(if cmp.within_tolerance() { 0 } else { 1 })
        }
        Command::Tune { common, sweep, out } => {
            let config = load(&common)?;
            let sweep = SweepSpec::load(&sweep)?;
            let result = cmd_tune(&config, &sweep)?;
            write_or_print(out.as_deref(), &result.to_csv()?)?;
            if let Some(best) = result.best() {
                eprintln!(
                    "best: {:?} at {:.4} gpoints/s",
                    best.schedule,
                    best.gpoints_per_s.unwrap_or(0.0)
                );
            }
            Ok(0)
        }
        Command::Bench { config, threads, out } => {
            let mut suite = BenchSuite::load(&config)?;
            if threads.is_some() {
                for e in &mut suite.entries {
                    if let Some(c) = e.config.as_mut() {
                        c.threads = threads;
                    }
                }
                if let Some(d) = suite.density.as_mut() {
                    d.config.threads = threads;
                }
            }
            let result = cmd_bench(&suite)?;
            write_or_print(out.as_deref(), &result.speedup_csv()?)?;
            if !result.density.is_empty() {
                let csv = result.density_csv()?;
                match &out {
                    Some(p) => std::fs::write(p.with_extension("density.csv"), csv)?,
                    None => print!("{csv}"),
                }
            }
            Ok(0)
        }
        Command::Validate { common, under_skew } => {
            let config = load(&common)?;
            let plan = plan_for(&config, under_skew)?;
            let (stream, report) = validate_config(&config, &plan)?;
            println!(
                "commands: {}  stencil commands: {}",
                stream.commands.len(),
                stream.stencil_commands()
            );
            print_validation(&plan, &report);
            Ok(if report.is_legal() { 0 } else { 1 })
        }
    }
}

/// Parses `args` and runs the chosen subcommand, returning the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match exec(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
