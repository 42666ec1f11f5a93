//! Batch command-line frontend for the micro-hotplate thermal simulator.
//!
//! Exit codes: 0 success, 1 parse/validation error, 2 solver failure,
//! 3 I/O failure.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "mtcsim",
    about = "Thermal simulation and figure-of-merit extraction for suspended micro-hotplate devices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state solve: VTK field, probe report, energy balance.
    Steady(CommonArgs),
    /// Step-response transient: probe trace CSV and time constants.
    Transient(CommonArgs),
    /// Power sweep (or imported P-T data): curve CSV, quadratic fit, R_th table.
    Sweep(CommonArgs),
    /// Linear sensor calibration from (temperature, voltage) samples.
    Calibrate(CommonArgs),
    /// Audit a fitted conversion curve against the operating-temperature target.
    Report(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run-configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `--out` wins and is taken relative to the working directory; the config's
/// `output_dir` resolves relative to the config file like every other path
/// in it.
fn out_dir(cfg: &RunConfig, args: &CommonArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output_dir.as_deref().map(|d| cfg.resolve(d)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn dispatch(command: &Command) -> Result<(), exit::CliError> {
    let args = match command {
        Command::Steady(a)
        | Command::Transient(a)
        | Command::Sweep(a)
        | Command::Calibrate(a)
        | Command::Report(a) => a,
    };
    let cfg = RunConfig::load(&args.config)?;
    let out = out_dir(&cfg, args);
    match command {
        Command::Steady(_) => commands::steady::run(&cfg, &out),
        Command::Transient(_) => commands::transient::run(&cfg, &out),
        Command::Sweep(_) => commands::sweep::run(&cfg, &out),
        Command::Calibrate(_) => commands::calibrate::run(&cfg, &out),
        Command::Report(_) => commands::report::run(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
