//! Batch driver for the Monge-Ampère flow laboratory.
//!
//! Every subcommand reads a JSON config, writes its artifacts (report.json,
//! CSV series, .cmaf snapshots) into the output directory, and exits 0 iff
//! all verdicts pass. Identical configs and seeds produce bitwise-identical
//! outputs regardless of `--threads`.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cmaflow::harness::{
    self,
    cauchy::experiment_cauchy,
    config::{
        CauchyConfig, EllipticConfig, InitialSpec, MonitorConfig, RunFlowConfig, SmoothingConfig,
        SmoothingInput, StationarityConfig,
    },
    report::ExperimentReport,
    smoothing::experiment_smoothing,
    stationarity::experiment_stationarity,
    OutputContext,
};

#[derive(Parser)]
#[command(name = "cmaflow", version, about = "Parabolic complex Monge-Ampère flow laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json, CSV series, and snapshots.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config, where one is used.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the independent solves/flows (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write per-step CSVs shaped for external plotting.
    #[arg(long)]
    emit_plots_data: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the elliptic Monge-Ampère equation (fixed or self-consistent RHS).
    SolveElliptic(Common),
    /// Integrate the parabolic flow from a configured initial datum.
    RunFlow(Common),
    /// Recompute the monitor suite over stored snapshots.
    Monitor(Common),
    /// Run a named experiment.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Elliptic solution as a fixed point of the flow.
    Stationarity(Common),
    /// Cauchy property of the truncation-level flows.
    Cauchy(Common),
    /// Instantaneous smoothing across grid refinement.
    Smoothing(Common),
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(report) => {
            let n_pass = report.verdicts.iter().filter(|v| v.pass).count();
            eprintln!(
                "{}: {}/{} verdicts pass",
                report.experiment,
                n_pass,
                report.verdicts.len()
            );
            for v in &report.verdicts {
                eprintln!(
                    "  [{}] {} (margin {:+.3e})",
                    if v.pass { "pass" } else { "FAIL" },
                    v.name,
                    v.margin
                );
            }
            std::process::exit(if report.all_pass { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExperimentReport> {
    let common = match &cli.command {
        Command::SolveElliptic(c) | Command::RunFlow(c) | Command::Monitor(c) => c,
        Command::Experiment { which } => match which {
            ExperimentCommand::Stationarity(c)
            | ExperimentCommand::Cauchy(c)
            | ExperimentCommand::Smoothing(c) => c,
        },
    };
    if common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global()
            .context("building the thread pool")?;
    }
    let raw = fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let out = OutputContext::new(&common.out, common.emit_plots_data)?;
    let started = Instant::now();

    let report = match &cli.command {
        Command::SolveElliptic(_) => {
            let cfg: EllipticConfig = parse(&raw)?;
            harness::run_solve_elliptic(&cfg, &out)?
        }
        Command::RunFlow(c) => {
            let mut cfg: RunFlowConfig = parse(&raw)?;
            if let (Some(seed), InitialSpec::Rough { seed: s, .. }) = (c.seed, &mut cfg.initial) {
                *s = seed;
            }
            harness::run_flow_cmd(&cfg, &out)?
        }
        Command::Monitor(_) => {
            let cfg: MonitorConfig = parse(&raw)?;
            harness::run_monitor(&cfg, &out)?
        }
        Command::Experiment { which } => match which {
            ExperimentCommand::Stationarity(_) => {
                let cfg: StationarityConfig = parse(&raw)?;
                experiment_stationarity(&cfg, &out)?
            }
            ExperimentCommand::Cauchy(c) => {
                let mut cfg: CauchyConfig = parse(&raw)?;
                if let Some(seed) = c.seed {
                    cfg.seed = seed;
                }
                experiment_cauchy(&cfg, &out)?
            }
            ExperimentCommand::Smoothing(c) => {
                let mut cfg: SmoothingConfig = parse(&raw)?;
                if let (Some(seed), SmoothingInput::Rough { seed: s, .. }) =
                    (c.seed, &mut cfg.input)
                {
                    *s = seed;
                }
                experiment_smoothing(&cfg, &out)?
            }
        },
    };
    // Wall time is logged, never serialized: reports stay deterministic.
    eprintln!("elapsed: {:.2}s", started.elapsed().as_secs_f64());
    Ok(report)
}

fn parse<T: serde::de::DeserializeOwned>(raw: &str) -> Result<T> {
    let v = serde_json::from_str(raw).context("parsing config")?;
    Ok(v)
}
