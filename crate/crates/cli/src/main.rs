//! `kljn-grid`: schedule, simulate, verify and analyze KLJN key distribution
//! over a chain network.
//!
//! Exit codes: 0 success, 1 verification or security-property failure,
//! 2 usage error, 3 I/O error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "kljn-grid", version, about = "KLJN key distribution over a one-dimensional smart-grid chain")]
struct Cli {
    /// JSON run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the full KE round schedule
    Schedule {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Run every pairwise key exchange of the network
    Simulate {
        #[command(flatten)]
        run: RunConfig,
        /// Write raw key bits to this file
        #[arg(long)]
        emit_secrets: Option<PathBuf>,
        /// Write a per-slot CSV trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check filter isolation for every round of the schedule
    VerifyFilters {
        #[command(flatten)]
        run: RunConfig,
        /// Flip one host's mode in one round, `ROUND:HOST` (global round index)
        #[arg(long, value_parser = commands::verify::parse_flip)]
        flip: Vec<(usize, usize)>,
        /// Include per-host filter flags for every round
        #[arg(long)]
        dump_fabric: bool,
    },
    /// Closed-form checks, timing tables and eavesdropper campaigns
    Analyze {
        #[command(flatten)]
        run: RunConfig,
        /// Upper end of the network-size range
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        /// Emit the timing table
        #[arg(long)]
        timing: bool,
        /// Run the eavesdropper indistinguishability campaign
        #[arg(long)]
        eve: bool,
        /// Mixed slots for the eavesdropper campaign
        #[arg(long, default_value_t = 10_000)]
        slots: usize,
    },
}

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Verification(String),
    Usage(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::Usage(m)
    }
}

impl From<kljn_core::Error> for CliError {
    fn from(e: kljn_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Schedule { run } => commands::schedule::run(&run.over(base)),
        Command::Simulate { run, emit_secrets, trace } => {
            commands::simulate::run(&run.over(base), emit_secrets.as_deref(), trace.as_deref())
        }
        Command::VerifyFilters { run, flip, dump_fabric } => commands::verify::run(&run.over(base), &flip, dump_fabric),
        Command::Analyze {
            run,
            n_max,
            timing,
            eve,
            slots,
        } => commands::analyze::run(&run.over(base), n_max, timing, eve, slots),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kljn-grid: {e}");
            ExitCode::from(e.code())
        }
    }
}
