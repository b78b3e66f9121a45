//! `doa`: experiment runner for the wideband DOA estimators.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use wideband_doa::eval::{export_simulation, run_experiment, write_spectrum_outputs, Axis, ExperimentConfig};

#[derive(Parser)]
#[command(name = "doa", version, about = "Wideband multi-source DOA estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the RMSE sweeps and write all CSV outputs.
    Run { config: PathBuf },
    /// Dump normalised MUSIC spectra and the iteration trace for one scene.
    Spectrum { config: PathBuf },
    /// Synthesize one scene and export it as WAV.
    Simulate { config: PathBuf },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn list(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let (report, files) = run_experiment(&cfg)?;
            for r in report.rows_for(Axis::Snr) {
                println!(
                    "{:<13} Q={} snr={:>6} J={:<3} rmse={:.3} det={:.3}",
                    r.method.tag(),
                    r.sources,
                    r.snr_db.map_or("none".into(), |s| format!("{s}")),
                    r.snapshots,
                    r.rmse,
                    r.detection_rate
                );
            }
            list(&files);
        }
        Command::Spectrum { config } => list(&write_spectrum_outputs(&load(&config)?)?),
        Command::Simulate { config } => list(&export_simulation(&load(&config)?)?),
    }
    Ok(())
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
