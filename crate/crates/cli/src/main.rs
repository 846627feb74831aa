use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gwf_lab::commands::{self, to_json};
use gwf_lab::{init_threads, CliError, Experiment, Overrides};

#[derive(Parser)]
#[command(
    name = "gwf-lab",
    version,
    about = "Experiments on Galton-Watson fractals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (JSON).
    config: PathBuf,
    /// Replaces the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the configured number of trials.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension, extremes, extinction and reduced law.
    Dims(Common),
    /// Sample trees and run every invariant check.
    Simulate(Common),
    /// Separation conditions and zoom identities.
    Check(Common),
    /// Minisets along a path of the first sample.
    Zoom(Common),
    /// Raster image of the first sample.
    Render(Common),
}

fn run(cli: Cli) -> Result<String, CliError> {
    init_threads()?;
    let (common, which) = match &cli.command {
        Command::Dims(c) => (c, "dims"),
        Command::Simulate(c) => (c, "simulate"),
        Command::Check(c) => (c, "check"),
        Command::Zoom(c) => (c, "zoom"),
        Command::Render(c) => (c, "render"),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        trials: common.trials,
    };
    let exp = Experiment::load(&common.config, &overrides)?;
    Ok(match which {
        "dims" => to_json(&commands::dims(&exp)?),
        "simulate" => to_json(&commands::simulate(&exp)?),
        "check" => to_json(&commands::check(&exp)?),
        "zoom" => to_json(&commands::zoom(&exp)?),
        _ => to_json(&commands::render(&exp)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage mistakes are configuration errors, help and version are not errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gwf-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
