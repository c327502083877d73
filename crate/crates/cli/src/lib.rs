//! The `paucity` command line.
//!
//! Every subcommand writes CSV into `--out-dir` together with a
//! `<subcommand>.manifest.json` describing the run.

use std::ffi::OsString;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
mod manifest;

pub use manifest::RunManifest;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "PAUCITY_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] paucity_core::Error),
    #[error("{0}")]
    Validation(String),
    #[error("schema mismatch in {path}: {detail}")]
    Schema { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_capacity() => EXIT_CAPACITY,
            CliError::Core(_) | CliError::Validation(_) | CliError::Schema { .. } => {
                EXIT_VALIDATION
            }
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "paucity", version, about = "Sums of two squares with prime coordinates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve r0/r1/r2 tallies and write per-block summaries.
    Sieve(SieveArgs),
    /// Checkpointed mean values S_ij, moments, supports and lemma sums.
    Mean(MeanArgs),
    /// Catalan, Landau-Ramanujan and derived coefficients.
    Constants(ConstantsArgs),
    /// Closed-form congruence counts against brute force.
    Congruence(CongruenceArgs),
    /// Census of off-diagonal solutions and the parametrization check.
    Offdiag(OffdiagArgs),
    /// Join mean-value CSVs with predicted main terms.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Directory for CSV and manifest output.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SieveOpts {
    #[arg(long)]
    pub limit: u64,
    #[arg(long, default_value_t = paucity_core::sieve::SieveConfig::DEFAULT_BLOCK_SIZE)]
    pub block_size: u64,
    /// Worker threads; PAUCITY_THREADS takes precedence.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[command(flatten)]
    pub sieve: SieveOpts,
    /// Also write the raw little-endian tallies to this file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum R0Flag {
    Pair,
    Div,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub sieve: SieveOpts,
    /// Comma-separated statistics, e.g. S01,S02,S22,DISPERSION(1).
    #[arg(long, default_value = "S01,S02,S22")]
    pub stats: String,
    /// `geometric:R` (from 1000, plus the limit) or `list:x1,x2,...`.
    #[arg(long, default_value = "geometric:10")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = R0Flag::Pair)]
    pub r0: R0Flag,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Target accuracy for Catalan's constant.
    #[arg(long, default_value_t = paucity_core::constants::DEFAULT_CATALAN_EPS)]
    pub eps: f64,
    /// Primes up to this bound enter the Euler products for K.
    #[arg(long, default_value_t = paucity_core::constants::DEFAULT_K_PRIME_LIMIT)]
    pub prime_limit: u64,
    /// Points z at which to report V(z) and V(z) log^3 z.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub density_z: Vec<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CongruenceKind {
    Rho,
    Nu,
}

#[derive(Debug, Args)]
pub struct CongruenceArgs {
    #[arg(long, value_enum)]
    pub kind: CongruenceKind,
    /// Largest modulus checked.
    #[arg(long)]
    pub max: u64,
    #[arg(long, default_value_t = 1)]
    pub t: u64,
    #[arg(long, default_value_t = 2)]
    pub d: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OffdiagMode {
    Direct,
    Param,
    Both,
}

#[derive(Debug, Args)]
pub struct OffdiagArgs {
    #[arg(long)]
    pub limit: u64,
    #[arg(long, value_enum, default_value_t = OffdiagMode::Both)]
    pub mode: OffdiagMode,
    /// Write every off-diagonal solution to quadruples.csv.
    #[arg(long)]
    pub emit_quadruples: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// CSV files written by `paucity mean`.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command_line = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match commands::execute(cli.command, command_line) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
