use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fingait_core::experiment::{cmd_bench_timing, cmd_simulate, cmd_synth, BenchReport, RunConfig};
use fingait_core::model::{load_weight_file, LoadedWeights};
use fingait_core::Method;

/// Benchmarks for the search-based inverse gait model.
///
/// Exit codes: 0 on success, 1 when any call exceeded the time or evaluation
/// budget, 2 on a bad config, weight file, or command line.
#[derive(Parser)]
#[command(name = "fingait", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic request sweep over every max-step set.
    Synth(RunArgs),
    /// Closed-loop PID runs against the rigid-body plant.
    Simulate(RunArgs),
    /// Wall-time distribution of the solver per method.
    BenchTiming(RunArgs),
    /// Load a weight file and check every tensor shape.
    ValidateWeights { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `methods` with a single method (mc, hjps, gps).
    #[arg(long)]
    method: Option<Method>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(method) = self.method {
            cfg.methods = vec![method];
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_report(report: &BenchReport) {
    println!("method,w_t,count,mean_L_t,mean_L_k,mean_L_total,mean_time_s,p99_time_s,max_time_s");
    for r in &report.summary {
        println!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.method,
            r.thrust_weight,
            r.count,
            r.mean_thrust_loss,
            r.mean_kinematic_loss,
            r.mean_total_loss,
            r.mean_time,
            r.p99_time,
            r.max_time
        );
    }
    for t in &report.tracking {
        println!(
            "tracking {} w_t={}: {}/{} small-step targets reached, max |request| {:.3} N",
            t.method, t.thrust_weight, t.small_step_on_target, t.small_step_targets, t.max_abs_request
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (args, command): (&RunArgs, fn(&RunConfig) -> fingait_core::Result<BenchReport>) = match &cli.command {
        Command::Synth(a) => (a, cmd_synth),
        Command::Simulate(a) => (a, cmd_simulate),
        Command::BenchTiming(a) => (a, cmd_bench_timing),
        Command::ValidateWeights { path } => {
            match load_weight_file(path).with_context(|| format!("validating {}", path.display()))? {
                LoadedWeights::Lstm(w) => println!("ok: lstm, input {} hidden {}", w.input_dim, w.hidden_dim),
                LoadedWeights::Dnn(w) => {
                    let dims: Vec<usize> = w.layers.iter().map(|l| l.output_dim).collect();
                    println!("ok: dnn, layer widths {dims:?}");
                }
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    let cfg = args.config()?;
    let report = command(&cfg)?;
    print_report(&report);
    eprintln!("wrote {}", cfg.output_dir.display());
    if report.budget_violated() {
        eprintln!(
            "budget violated: {} calls over {} s, {} calls out of evaluations",
            report.time_violations, report.time_budget, report.evaluation_violations
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
