use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use shocklab::config::{ExperimentConfig, Mode};
use shocklab::run::{execute, reject_config, RunRequest, Status};

/// Viscous shock experiments: simulation, profiles, inequality checks and
/// the acceptance suite.
#[derive(Debug, Parser)]
#[command(name = "shocklab", version)]
struct Cli {
    /// Mode to run; overrides `run.mode` in the config file.
    #[arg(value_enum)]
    mode: Mode,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Root directory for per-run output directories.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Worker threads; falls back to SHOCKLAB_THREADS, then the config.
    #[arg(long, env = "SHOCKLAB_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Status::Usage.exit_code() as u8),
            };
        }
    };
    let usage = ExitCode::from(Status::Usage.exit_code() as u8);
    let raw = match std::fs::read_to_string(&cli.config) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("shocklab: {}: {e}", cli.config.display());
            return usage;
        }
    };
    let config = match ExperimentConfig::parse(&raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("shocklab: {}: {e}", cli.config.display());
            if let Err(io) = reject_config(&cli.out, cli.mode, &raw, &e) {
                eprintln!("shocklab: cannot write run output: {io}");
            }
            return usage;
        }
    };
    let req = RunRequest {
        mode: cli.mode,
        config,
        out_root: cli.out,
        threads: cli.threads,
    };
    match execute(&req) {
        Ok(outcome) => {
            eprintln!("shocklab: {} ({})", outcome.message, outcome.dir.display());
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("shocklab: cannot write run output: {e}");
            ExitCode::from(Status::NumericalFailure.exit_code() as u8)
        }
    }
}
