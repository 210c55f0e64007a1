use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tlsbrillouin::commands::{cmd_fit, cmd_model, cmd_report, cmd_synth};
use tlsbrillouin::config::RunConfig;

#[derive(Parser)]
#[command(name = "tlsbrillouin", version, about = "Tunneling-state Brillouin linewidth model, synthesis and fitting")]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the linewidth model on a temperature/intensity/frequency grid.
    Model {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// e.g. "T=1.1:4.2:32, J=0.01:100:5:log, f=9.188e9"
        #[arg(long)]
        grid: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Synthesize a seeded dataset of Brillouin gain spectra.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a dataset and extract the tunneling-state parameters.
    Fit {
        dataset: PathBuf,
        /// Defaults to the config.json stored in the dataset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to DATASET/fit.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare a fit against the published parameters.
    Report { fit_dir: PathBuf },
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.parallel {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Model { config, out, grid, seed } => {
            let path = cmd_model(&load(&config, seed)?, &grid, &out)?;
            println!("{}", path.display());
        }
        Command::Synth { config, out, seed } => {
            let manifest = cmd_synth(&load(&config, seed)?, &out)?;
            println!("{} traces written to {}", manifest.trace_count, out.display());
        }
        Command::Fit { dataset, config, out, seed } => {
            let config = config.unwrap_or_else(|| dataset.join("config.json"));
            let out = out.unwrap_or_else(|| dataset.join("fit"));
            let report = cmd_fit(&dataset, &load(&config, seed)?, &out)?;
            println!(
                "{} traces, {} bins, {} temperatures, {} flagged; report in {}",
                report.traces_used,
                report.per_bin.len(),
                report.per_temperature.len(),
                report.flagged.len(),
                out.display()
            );
        }
        Command::Report { fit_dir } => print!("{}", cmd_report(&fit_dir)?),
    }
    Ok(())
}
