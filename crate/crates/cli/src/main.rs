//! Command-line front end for the synthesis and evaluation pipeline.

mod manifest;
mod ops;

use std::path::PathBuf;
use std::process;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use voxsplice::eval::{load_config, EvalConfig};

use ops::Session;

#[derive(Parser)]
#[command(
    name = "voxsplice",
    version,
    about = "Concatenative command synthesis and evaluation over forced-aligned speech"
)]
struct Cli {
    /// TOML settings file; the flags below override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed for every random choice in the run.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker thread count; defaults to the logical core count.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Crossfade between spliced units, in milliseconds.
    #[arg(long, global = true, value_name = "MS")]
    crossfade_ms: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut diphone and word units from aligned recordings into an inventory.
    Extract(ops::ExtractArgs),
    /// Count diphone frequencies over transcripts and export them as CSV.
    Freq(ops::FreqArgs),
    /// Relate popularity cutoffs to command coverage and recording time.
    Coverage(ops::CoverageArgs),
    /// Splice one command from an inventory, with optional mask and donor.
    Synth(ops::SynthArgs),
    /// Score every (target, source, command) cell of a cross-profile grid.
    Evaluate(ops::EvaluateArgs),
    /// Summarize an evaluation results CSV as Markdown.
    Report(ops::ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }

    let mut config = match &cli.config {
        Some(path) => {
            load_config(path).with_context(|| format!("loading config {}", path.display()))?
        }
        None => EvalConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(crossfade_ms) = cli.crossfade_ms {
        config.crossfade_ms = crossfade_ms;
    }
    config.validate()?;

    let session = Session {
        config,
        config_path: cli.config,
        jobs: cli.jobs,
    };
    match &cli.command {
        Command::Extract(args) => ops::run_extract(&session, args),
        Command::Freq(args) => ops::run_freq(&session, args),
        Command::Coverage(args) => ops::run_coverage(&session, args),
        Command::Synth(args) => ops::run_synth(&session, args),
        Command::Evaluate(args) => ops::run_evaluate(&session, args),
        Command::Report(args) => ops::run_report(&session, args),
    }
}
