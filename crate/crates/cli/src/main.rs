//! `iffl <experiment> --config <file> [--out <dir>] [--format csv|jsonl]`
//!
//! Exit status: 0 on success, 1 on validation errors, 2 on numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use iffl_core::io::{config_text_from, parse_config_for, run_experiment, ExperimentKind, OutputFormat};
use iffl_core::IfflError;

#[derive(Debug, Parser)]
#[command(name = "iffl", version, about = "Incoherent feedforward loop experiments")]
struct Cli {
    /// One of simulate, step, equilibria, limits, sweep, heatmap, phase.
    experiment: ExperimentKind,
    /// Config file in `section.key = value` form, or a manifest.jsonl to replay.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tabular output format; overrides `output.format`.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Accepted for interface compatibility; every experiment is deterministic.
    #[arg(long)]
    seed: Option<String>,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn run(cli: &Cli) -> Result<String, IfflError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| IfflError::Io {
        path: cli.config.display().to_string(),
        message: e.to_string(),
    })?;
    let text = config_text_from(&text)?;
    let mut config = parse_config_for(&text, Some(cli.experiment))?;
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    Ok(run_experiment(&config)?.summary)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("iffl {}: {e}", cli.experiment);
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}
