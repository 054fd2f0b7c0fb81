//! Command-line driver: Monte Carlo runs, threshold estimation, layout dumps.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use surface_peps::contraction::Engine;
use surface_peps::experiment::{curves_from_records, estimate_threshold, read_records, run_to_csv, ExperimentConfig};
use surface_peps::layout::{build_layout, layout_json};

#[derive(Parser)]
#[command(name = "surface-peps", version, about = "Surface-code error correction under arbitrary local noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials described by a JSON configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// exact | boundary_mps
        #[arg(long)]
        engine: Option<String>,
        #[arg(long)]
        chi: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Output CSV; the manifest is written to `<out>.manifest.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the threshold from one or more trial CSVs.
    Threshold {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print the code geometry as JSON.
    Layout {
        width: usize,
        length: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, engine, chi, samples, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(e) = engine {
                cfg.engine.engine = match Engine::from_name(&e) {
                    Some(e) => e,
                    None => bail!("unknown engine '{e}' (expected exact or boundary_mps)"),
                };
            }
            if let Some(c) = chi {
                cfg.engine.chi = c;
            }
            if let Some(n) = samples {
                cfg.samples = n;
            }
            if let Some(o) = out {
                cfg.output = Some(o.display().to_string());
            }
            let path = PathBuf::from(cfg.output.clone().unwrap_or_else(|| "trials.csv".into()));
            let manifest = run_to_csv(&cfg, &path)?;
            eprintln!("{} records -> {} ({:.1} s)", manifest.records, manifest.csv, manifest.wall_seconds);
        }
        Command::Threshold { inputs } => {
            let mut records = Vec::new();
            for p in &inputs {
                records.extend(read_records(p).with_context(|| format!("reading {}", p.display()))?);
            }
            let est = estimate_threshold(&curves_from_records(&records))?;
            println!("{}", serde_json::to_string_pretty(&est)?);
        }
        Command::Layout { width, length } => {
            println!("{}", layout_json(&build_layout(width, length)?));
        }
    }
    Ok(())
}
