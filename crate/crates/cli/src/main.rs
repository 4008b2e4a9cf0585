//! `logsp` — batch front end: solve, validate, bench, sweep.
//!
//! Exit codes: 0 success/converged, 1 config error, 2 non-convergence,
//! 3 failed validation. `LOGSP_THREADS` caps internal parallelism.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

mod bench_cmd;
mod config;
mod error;
mod output;
mod solve_cmd;
mod sweep_cmd;
mod validate_cmd;

use error::CliError;

#[derive(Parser)]
#[command(
    name = "logsp",
    version,
    about = "Planar Schrödinger–Poisson ground states with a logarithmic kernel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a ground-state candidate and write summary.json + field.csv.
    Solve {
        /// JSON run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the invariant suites and print a pass/fail table.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
    /// Time direct vs fast V0 evaluation and emit CSV on stdout.
    Bench {
        /// Comma-separated grid sizes, each at least 8.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// One solve per value of the chosen axis, aggregated into sweep.csv.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        axis: sweep_cmd::Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("LOGSP_THREADS") {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                CliError::Config(format!(
                    "LOGSP_THREADS must be a positive integer, got '{v}'"
                ))
            })?;
            if n == 0 {
                return Err(CliError::Config("LOGSP_THREADS must be positive".into()));
            }
            logsp_core::par::configure_threads(Some(n));
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn run() -> Result<i32, CliError> {
    configure_threads()?;
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(0);
        }
        Err(e) => {
            eprint!("{e}");
            return Ok(1);
        }
    };
    match cli.command {
        Command::Solve { config, out } => solve_cmd::solve_cmd(config.as_deref(), &out),
        Command::Validate { level } => Ok(validate_cmd::validate_cmd(match level {
            LevelArg::Quick => validate_cmd::Level::Quick,
            LevelArg::Full => validate_cmd::Level::Full,
        })),
        Command::Bench { sizes } => bench_cmd::bench_cmd(&sizes),
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => sweep_cmd::sweep_cmd(config.as_deref(), axis, &values, &out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
