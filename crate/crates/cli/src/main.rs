mod commands;
mod manifest;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use equid::{ErrorKind, Limits};

/// Exit status for malformed command lines.
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "equid", version, about = "Joint equidistribution of additive functions modulo q")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output file; `.json` writes JSON, anything else CSV.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Work budget for enumerations; `EQUID_BUDGET` overrides it.
    #[arg(long, global = true, value_parser = output::parse_u128)]
    pub budget: Option<u128>,
    /// Validate inputs and stop before computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Write a replayable manifest of this invocation.
    #[arg(long, global = true)]
    pub manifest_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide joint equidistribution modulo q.
    Check(commands::CheckArgs),
    /// Exponential sums and bound sweeps.
    Charsum(commands::CharsumArgs),
    /// Exact counts of the residue sets V_{N,M}(q; w).
    Vcount(commands::VcountArgs),
    /// Joint residue counts of g_1..g_M over n ≤ x.
    Count(commands::CountArgs),
    /// Sieve experiments: thm1.2, thm1.3, cex4.1, cex6.1, thm1.4.
    Experiment(commands::ExperimentArgs),
    /// Smith normal form data of the derivative coefficient matrix.
    Snf(commands::SnfArgs),
    /// Replay a manifest written with --manifest-out.
    Manifest(commands::ManifestArgs),
}

pub fn limits(global: &GlobalOpts) -> Result<Limits, equid::Error> {
    let env = std::env::var("EQUID_BUDGET").ok();
    let budget = match env.as_deref() {
        Some(text) => Some(
            output::parse_u128(text)
                .map_err(|e| equid::Error::Precondition(format!("EQUID_BUDGET: {e}")))?,
        ),
        None => global.budget,
    };
    Ok(budget.map(Limits::with_work_budget).unwrap_or_default())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Precondition => 1,
        ErrorKind::Budget => 2,
        ErrorKind::Invariant => 3,
    }
}

/// Runs one command line, returning the process exit status.
pub fn run(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Some(n) = cli.global.threads {
        // a second initialisation (manifest replay) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Some(path) = &cli.global.manifest_out {
        if let Err(e) = manifest::Manifest::capture(&argv).and_then(|m| m.write(path)) {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(commands::CliError::Core(e)) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
        Err(commands::CliError::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(commands::CliError::Exit(code)) => code,
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
