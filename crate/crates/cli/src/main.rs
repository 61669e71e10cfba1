//! `supercrit` command-line front end.

mod reference;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use supercrit::{Error, FirstStepMode};

pub const EXIT_BLOWUP: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_STABILITY: u8 = 65;
pub const EXIT_FAILURE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "supercrit", version, about = "Radial energy-supercritical wave equation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one case and write series, snapshots, plots and a manifest.
    Run(RunArgs),
    /// Run one of the verification studies and report a verdict.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Budget {
    /// Published mesh.
    Paper,
    /// Coarser mesh that finishes in seconds.
    Desk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StartMode {
    Paper,
    SecondOrder,
}

impl From<StartMode> for FirstStepMode {
    fn from(m: StartMode) -> Self {
        match m {
            StartMode::Paper => FirstStepMode::PaperFaithful,
            StartMode::SecondOrder => FirstStepMode::SecondOrder,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Library case 1-5, or `custom` (requires --config with u0).
    #[arg(long)]
    case: Option<String>,
    #[arg(long, value_parser = ["3", "5"])]
    dim: Option<String>,
    /// JSON configuration document; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    dr: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    /// Mesh preset used when no --config is given.
    #[arg(long, value_enum, default_value = "paper")]
    budget: Budget,
    #[arg(long, value_enum, default_value = "paper")]
    first_step: StartMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Convergence,
    Truncation,
    Energy,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    study: Study,
    #[arg(long, value_parser = ["3", "5"], default_value = "3")]
    dim: String,
    #[arg(long, value_enum, default_value = "desk")]
    budget: Budget,
    /// Defaults to second-order for convergence and paper otherwise.
    #[arg(long, value_enum)]
    first_step: Option<StartMode>,
}

/// Exit status for a library error.
pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Stability { .. } => EXIT_STABILITY,
        Error::Blowup { .. } => EXIT_BLOWUP,
        Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::NonIntegerMesh { .. }
        | Error::UnknownCase(_)
        | Error::UnsupportedDimension(_)
        | Error::Expression { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SUPERCRIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SUPERCRIT_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let code = match cli.command {
        Command::Run(args) => run::cmd_run(&args),
        Command::Verify(args) => verify::cmd_verify(&args),
    };
    ExitCode::from(code)
}
