//! Command-line driver: CSV ingestion, configuration and the subcommands.

pub mod args;
mod commands;
pub mod config;
pub mod error;
pub mod ingest;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};
pub use commands::provenance;
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, rolling_volatility, write_series_csv};

/// Parses `argv`, layering the `--config` section for the chosen command
/// underneath the explicit flags.
pub fn parse_args(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let cli = Cli::try_parse_from(&argv).map_err(ParseFailure::Clap)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let name = cli.command.name();
    let extra = config::section_flags(&path, name).map_err(ParseFailure::Cli)?;
    if extra.is_empty() {
        return Ok(cli);
    }
    let merged = config::splice(&argv, name, extra);
    Cli::try_parse_from(merged).map_err(|e| {
        ParseFailure::Cli(CliError::Config(format!(
            "{}: {}",
            path.display(),
            e.kind().as_str().unwrap_or("invalid value")
        )))
    })
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Cli(CliError),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Test(a) => commands::test_cmd(a),
        Command::Datestamp(a) => commands::datestamp_cmd(a),
        Command::Infer(a) => commands::infer_cmd(a),
        Command::Calibrate(a) => commands::calibrate_cmd(a),
        Command::Bench(a) => commands::bench_cmd(a),
        Command::Report(a) => commands::report_cmd(a),
    }
}
