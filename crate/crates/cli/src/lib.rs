//! `kcc` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 no fixed point found,
//! 3 deviation run truncated.

pub mod commands;
pub mod definition;
pub mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use definition::SystemDefinition;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

/// How a successful command finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    NoFixedPoint,
    Truncated,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NoFixedPoint => 2,
            Status::Truncated => 3,
        }
    }
}

pub const INPUT_ERROR: u8 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "kcc", version, about = "KCC geometric invariants and Jacobi stability of ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find fixed points and classify them (Lyapunov and Jacobi).
    Analyze(AnalyzeArgs),
    /// Print the KCC invariants at one phase point.
    Invariants(InvariantsArgs),
    /// Integrate the deviation equation along a trajectory.
    Deviate(DeviateArgs),
    /// List the built-in models.
    Models(ModelsArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Built-in model name or path to a definition file.
    pub system: String,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// Tolerance override NAME=VALUE (hyperbolic, residual, merge, fixed-point, spectrum).
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Newton seeds, e.g. "0,0;1,0.5".
    #[arg(long, allow_hyphen_values = true)]
    pub seeds: Option<String>,
    /// Seed box, e.g. "-1:1,0:2".
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Seeds per box axis.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Phase point "x1,..,xn;y1,..,yn[;t]". Defaults to the sample state with y = f(x).
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
}

#[derive(Debug, Args)]
pub struct DeviateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial position (default: the model's sample state, else the origin).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Initial velocity (default: f(x0)).
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<String>,
    /// Initial deviation velocity (default: first unit vector).
    #[arg(long = "W", allow_hyphen_values = true)]
    pub w: Option<String>,
    #[arg(long, default_value_t = kcc_core::deviation::DEFAULT_T_END, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = kcc_core::deviation::DEFAULT_DT, allow_hyphen_values = true)]
    pub dt: f64,
    /// Probe time for the t² focusing comparison.
    #[arg(long, default_value_t = kcc_core::deviation::DEFAULT_PROBE, allow_hyphen_values = true)]
    pub probe: f64,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelsArgs {
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    match cli.command {
        Command::Analyze(args) => commands::analyze(&args, out),
        Command::Invariants(args) => commands::invariants(&args, out),
        Command::Deviate(args) => commands::deviate(&args, out),
        Command::Models(args) => commands::models(&args, out),
    }
}

/// Parses `std::env::args`, runs, and maps the outcome to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
