//! `guided-minimax`: design games with a prescribed unique minimax solution,
//! certify matrices, and simulate guided repeated play.

mod commands;
mod config;
mod output;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use guided_minimax::arena::ArenaError;
use guided_minimax::designer::DesignError;
use guided_minimax::game::GameError;
use guided_minimax::verifier::VerifyError;
use thiserror::Error;

use commands::Context;
use config::{ExperimentConfig, NumericMode};
use output::Numbers;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {}", .0.name(), .0)]
    Design(#[from] DesignError),
    #[error("not a unique minimax solution; certificate written to {}", .0.display())]
    NotCertified(PathBuf),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Design(_) => 2,
            CliError::NotCertified(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "guided-minimax", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a game whose unique minimax strategy is the configured target.
    Design(CommonArgs),
    /// Certify a matrix against a claimed minimax pair.
    Verify(CommonArgs),
    /// Play a learner against a column policy and record the trajectory.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number format for JSON output.
    #[arg(long, value_enum)]
    mode: Option<NumericMode>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Skip certification of the game before playing.
    #[arg(long)]
    trust: bool,
    /// Play this many matches on random designed games in parallel.
    #[arg(long, value_name = "N")]
    sweep: Option<usize>,
}

fn context(args: &CommonArgs) -> Result<Context, CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let mode = args.mode.or(config.mode).unwrap_or_default();
    Ok(Context {
        config,
        out,
        numbers: Numbers(mode),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Design(args) => commands::design_cmd(&context(&args)?),
        Command::Verify(args) => commands::verify_cmd(&context(&args)?),
        Command::Simulate(args) => {
            let ctx = context(&args.common)?;
            match args.sweep {
                Some(0) => Err(CliError::Input("--sweep needs at least one match".into())),
                Some(n) => commands::sweep_cmd(&ctx, n),
                None => commands::simulate_cmd(&ctx, args.trust),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
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
