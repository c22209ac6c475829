use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use softnet::harness::{self, BatchSpec};
use softnet::scenario;
use softnet::sim::{self, SimConfig};

/// Soft-net debris capture simulator.
#[derive(Debug, Parser)]
#[command(name = "softnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one episode and print its metrics as JSON.
    Run {
        /// Scenario file; defaults apply when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the per-step trajectory to this CSV file.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Write the effective configuration to this file.
        #[arg(long)]
        echo: Option<PathBuf>,
    },
    /// Run the batch protocol and write results into a directory.
    Batch {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (overrides the scenario).
        #[arg(long, env = "SOFTNET_WORKERS")]
        workers: Option<usize>,
        /// Number of start points (overrides the scenario).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Re-aggregate stored episode rows, optionally drawing scatter plots.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

fn load(path: Option<&Path>) -> Result<(SimConfig, BatchSpec)> {
    match path {
        Some(p) => Ok(scenario::load_scenario(p)?),
        None => Ok((SimConfig::default(), BatchSpec::default())),
    }
}

fn run(scenario_path: Option<&Path>, record: Option<&Path>, echo: Option<&Path>) -> Result<()> {
    let (cfg, batch) = load(scenario_path)?;
    if let Some(p) = echo {
        scenario::write_echo(p, &cfg, &batch)?;
    }
    let started = Instant::now();
    let (metrics, rec) = sim::run_episode(&cfg, record.is_some())?;
    let wall = started.elapsed().as_secs_f64();
    if let (Some(path), Some(rec)) = (record, rec) {
        rec.save_csv(path)?;
    }
    let mut doc = serde_json::to_value(&metrics)?;
    doc["wall_time_s"] = serde_json::json!(wall);
    doc["steps_per_second"] = serde_json::json!(metrics.steps as f64 / wall.max(1e-9));
    doc["config"] = serde_json::to_value(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn batch(scenario_path: Option<&Path>, out: &Path, workers: Option<usize>, samples: Option<usize>) -> Result<()> {
    let (cfg, mut spec) = load(scenario_path)?;
    if workers.is_some() {
        spec.workers = workers;
    }
    if let Some(n) = samples {
        spec.samples = n;
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    scenario::write_echo(&out.join("scenario.toml"), &cfg, &spec)?;
    let result = harness::run_batch(&cfg, &spec)?;
    harness::write_batch_outputs(out, &result)?;
    let summary = harness::write_report(out, &result.rows, true)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn report(input: &Path, svg: bool) -> Result<()> {
    let rows = harness::read_rows_file(&input.join("episodes.csv"))?;
    let summary = harness::write_report(input, &rows, svg)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { scenario, record, echo } => run(scenario.as_deref(), record.as_deref(), echo.as_deref()),
        Command::Batch {
            scenario,
            out,
            workers,
            samples,
        } => batch(scenario.as_deref(), out, *workers, *samples),
        Command::Report { input, svg } => report(input, *svg),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
