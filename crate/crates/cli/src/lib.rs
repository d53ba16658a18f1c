//! `spotwise` command-line front end.
//!
//! The binary adds no semantics of its own: every subcommand parses files,
//! calls into `spotwise-core`, and renders the result. Exit codes: 0 success,
//! 1 data error, 2 configuration or usage error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Outcome of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    /// Files written by the command.
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "spotwise",
    version,
    about = "Spot-level parking occupancy engine",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the detection pipeline over a JSONL log and emit frame results
    /// plus a bitmask series.
    Process(commands::process::ProcessArgs),
    /// Pack a bit string like 1000011001100110 into its integer form.
    Encode(commands::codec::EncodeArgs),
    /// Unpack an integer bitmask into bits and occupancy counts.
    Decode(commands::codec::DecodeArgs),
    /// Occupancy statistics over a stored series.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Detection-area distribution analysis from an area log.
    Areas(commands::areas::AreasArgs),
    /// Compare predicted against true occupancy vectors.
    Eval(commands::eval::EvalArgs),
    /// Run the end-to-end telemetry simulation from a scenario file.
    Simulate(commands::simulate::SimulateArgs),
    /// Build the digital-shadow entity graph and emit entity payloads.
    Entities(commands::entities::EntitiesArgs),
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// Per-spot daily hours, z-scores, and anomaly flags.
    Daily(commands::stats_cmd::DailyArgs),
    /// Per-spot totals and hourly pattern over a seven-day window.
    Weekly(commands::stats_cmd::WeeklyArgs),
}

/// Shared output-mode switch.
#[derive(Debug, Args)]
pub(crate) struct OutputMode {
    /// Emit machine-readable JSON instead of the plain-text report.
    #[arg(long)]
    json: bool,
}

/// Parse `argv` and run the selected subcommand.
pub fn run_command<I, S>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version print to stdout and are not failures
            let exit_code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return CommandOutcome {
                exit_code,
                artifacts: Vec::new(),
            };
        }
    };

    let result = match cli.command {
        Command::Process(args) => commands::process::run(args),
        Command::Encode(args) => commands::codec::run_encode(args),
        Command::Decode(args) => commands::codec::run_decode(args),
        Command::Stats(StatsCommand::Daily(args)) => commands::stats_cmd::run_daily(args),
        Command::Stats(StatsCommand::Weekly(args)) => commands::stats_cmd::run_weekly(args),
        Command::Areas(args) => commands::areas::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Entities(args) => commands::entities::run(args),
    };

    match result {
        Ok(artifacts) => CommandOutcome {
            exit_code: 0,
            artifacts,
        },
        Err(err) => {
            eprintln!("error: {err}");
            CommandOutcome {
                exit_code: if err.is_config() { 2 } else { 1 },
                artifacts: Vec::new(),
            }
        }
    }
}
