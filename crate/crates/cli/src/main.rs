//! `spinqec`: reproducible experiments on spin coherent-state codes.
//!
//! Exit status is 0 on success, 1 when a run misses its thresholds (the
//! output is still written), 2 on invalid input and 3 when the output
//! cannot be produced for another reason.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(name = "spinqec", version, about = "Spin coherent-state code experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate Knill-Laflamme scan of a code against an error family.
    KlScan(Settings),
    /// |<0|X_T|1>| over rotation angles in [0, pi].
    OverlapCurve(Settings),
    /// Monte-Carlo syndrome extraction over a range of rotation errors.
    RecoverySweep(Settings),
    /// Syndromes of the correctable window of a finite GKP code.
    GkpTable(Settings),
    /// Monopole harmonics on a polar grid.
    Harmonics(Settings),
    /// Syndrome-window failure probability against the Laplace estimate.
    TailCheck(Settings),
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Internal(String),
}

impl From<spinqec::Error> for CliError {
    fn from(e: spinqec::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPINQEC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("SPINQEC_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

type Runner = fn(Settings) -> Result<commands::Outcome, CliError>;

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (settings, runner): (Settings, Runner) = match cli.command {
        Command::KlScan(s) => (s, commands::kl_scan),
        Command::OverlapCurve(s) => (s, commands::overlap_curve),
        Command::RecoverySweep(s) => (s, commands::recovery_sweep),
        Command::GkpTable(s) => (s, commands::gkp_table),
        Command::Harmonics(s) => (s, commands::harmonics),
        Command::TailCheck(s) => (s, commands::tail_check),
    };
    // The output path may come from the config file as well.
    let file = match &settings.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let out = settings.out.clone().or(file.out);
    let outcome = runner(settings)?;
    match out {
        Some(path) => output::write_atomic(&path, &outcome.text)?,
        None => std::io::stdout()
            .lock()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("spinqec: thresholds not met");
            ExitCode::from(1)
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("spinqec: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("spinqec: internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
