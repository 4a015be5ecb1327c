//! Command-line front end: configuration, sweeps and file output.

pub mod config;
pub mod output;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{cmd_density, cmd_dispersion, cmd_modes, cmd_rotation, cmd_validate, ValidationReport};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver error: {0}")]
    Solver(Error),
    #[error("{0} validation check(s) failed")]
    Validation(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) | Error::Domain(m) => CliError::Config(m),
            other => CliError::Solver(other),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cylspin", version, about = "Spin-orbit split bound modes of a cylindrical step potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate transverse modes, spin-orbit shifts and rotation rates.
    Modes(CommonArgs),
    /// Write beta(E) curves, one file per state.
    Dispersion(CommonArgs),
    /// Rotation rate against well strength R.
    Rotation(CommonArgs),
    /// Sample a probability density on a grid.
    Density(CommonArgs),
    /// Run the built-in consistency checks.
    Validate(CommonArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Modes(_) => "modes",
            Command::Dispersion(_) => "dispersion",
            Command::Rotation(_) => "rotation",
            Command::Density(_) => "density",
            Command::Validate(_) => "validate",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Modes(a)
            | Command::Dispersion(a)
            | Command::Rotation(a)
            | Command::Density(a)
            | Command::Validate(a) => a,
        }
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = RunConfig::load(common.config.as_deref(), &common.set, common.out.as_deref())?;
    output::prepare_dir(&cfg.out_dir)?;
    let name = cli.command.name();
    let (files, failures) = match cli.command {
        Command::Modes(_) => (cmd_modes(&cfg)?, 0),
        Command::Dispersion(_) => (cmd_dispersion(&cfg)?, 0),
        Command::Rotation(_) => (cmd_rotation(&cfg)?, 0),
        Command::Density(_) => (cmd_density(&cfg)?, 0),
        Command::Validate(_) => {
            let report = cmd_validate(&cfg)?;
            (vec![report.path.clone()], report.failures)
        }
    };
    output::write_sidecar(&cfg.out_dir, name, args, &files)?;
    if failures > 0 {
        return Err(CliError::Validation(failures));
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let shown: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &shown) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cylspin: {e}");
            e.exit_code()
        }
    }
}
