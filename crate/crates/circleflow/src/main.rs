use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use circleflow::config::ExperimentConfig;
use circleflow::experiment::{self, EXIT_SCHEMA};

/// Gradient-flow experiments for a 1D nonlocal transport model on the circle.
#[derive(Parser)]
#[command(name = "circleflow", version, about)]
struct Cli {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Override the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Suppress progress output (artifacts are still written).
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("circleflow: {e:#}");
            return ExitCode::from(EXIT_SCHEMA as u8);
        }
    };
    if let Some(dir) = cli.output {
        config.output_dir = dir;
    }
    match experiment::run(&config, cli.quiet) {
        Ok(out) => {
            if !cli.quiet {
                println!("{}", out.summary);
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("circleflow: {e:#}");
            ExitCode::FAILURE
        }
    }
}
