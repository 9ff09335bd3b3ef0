//! `monogamy`: calculators and simulators for monogamy-of-entanglement games.

mod commands;
mod fixtures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] monogamy_core::Error),
    #[error("{0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "monogamy", version, about)]
struct Cli {
    /// Output format; defaults to CSV for sweeps and JSON otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form winning-probability bounds over a sweep of n and γ.
    Bounds(commands::BoundsArgs),
    /// Alternating optimization for a good strategy (a lower bound).
    Seesaw(commands::SeesawArgs),
    /// Finite-key security parameter of the QKD protocol.
    QkdDelta(commands::QkdDeltaArgs),
    /// Largest key length meeting a security target, over a sweep.
    QkdKeylen(commands::QkdKeylenArgs),
    /// Monte-Carlo runs of the QKD protocol.
    QkdSim(commands::QkdSimArgs),
    /// Position-verification soundness bounds and simulation.
    Posver(PosverArgs),
    /// Checks the two-observer uncertainty relation.
    UrCheck(commands::UrCheckArgs),
    /// Fixture utilities.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct PosverArgs {
    #[command(subcommand)]
    mode: PosverMode,
}

#[derive(Subcommand)]
enum PosverMode {
    /// Soundness bounds over a sweep of n, d and γ.
    Bound(commands::PosverBoundArgs),
    /// Simulated rounds against one prover model.
    Simulate(commands::PosverSimArgs),
}

#[derive(Args)]
struct FixturesArgs {
    #[command(subcommand)]
    action: FixturesAction,
}

#[derive(Subcommand)]
enum FixturesAction {
    /// Parses and validates fixture files.
    Validate(commands::ValidateArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MONOGAMY_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("MONOGAMY_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let report = match cli.command {
        Command::Bounds(a) => commands::bounds(a)?,
        Command::Seesaw(a) => commands::seesaw(a)?,
        Command::QkdDelta(a) => commands::qkd_delta(a)?,
        Command::QkdKeylen(a) => commands::qkd_keylen(a)?,
        Command::QkdSim(a) => commands::qkd_sim(a)?,
        Command::Posver(p) => match p.mode {
            PosverMode::Bound(a) => commands::posver_bound(a)?,
            PosverMode::Simulate(a) => commands::posver_simulate(a)?,
        },
        Command::UrCheck(a) => commands::ur_check(a)?,
        Command::Fixtures(f) => match f.action {
            FixturesAction::Validate(a) => commands::validate(a)?,
        },
    };
    let failed = report.result.get("all_valid") == Some(&serde_json::Value::Bool(false));
    let text = report.render(cli.format, cli.deterministic)?;
    match cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if failed {
        return Err(CliError::Fixture("one or more fixtures are invalid".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
