//! qbanyan: heralded optical switching primitives, the block-free 2x2
//! switch unit, and self-routing Banyan fabrics, driven from the command
//! line with deterministic, re-runnable reports.
//!
//! Exit status: 0 on success, 1 on domain errors, 2 on usage errors.

mod args;
mod commands;
mod report;

use std::fmt;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, FileConfig, FormatArg};
use qbanyan_core::DetectorModel;
use report::{emit, Report};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: flags, config keys, value shapes. Exit 2.
    Usage(String),
    /// The simulation rejected the request. Exit 1.
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain(msg) => write!(f, "error: {msg}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let format = match cli.format.or(file.format_arg()?) {
        Some(f) => f,
        None => FormatArg::Json,
    };
    let output = cli.output.clone().or_else(|| file.output.clone());
    let eta = cli.eta.or(file.eta).unwrap_or(1.0);
    let dark = cli.dark.or(file.dark).unwrap_or(0.0);
    let model = DetectorModel::new(eta, dark).map_err(|e| CliError::Domain(e.to_string()))?;

    let started = Instant::now();
    let (config, result) = match &cli.command {
        Command::Gate(a) => commands::run_gate(a, &file, &model)?,
        Command::Unit(a) => commands::run_unit(a, &file, &model)?,
        Command::Route(a) => commands::run_route(a, &file)?,
        Command::Stats(a) => commands::run_stats(a, &file, &model)?,
        Command::Enumerate(a) => commands::run_enumerate(a, &file)?,
    };
    let duration_ms = started.elapsed().as_secs_f64() * 1e3;

    let report = Report::new(config, result, duration_ms);
    emit(&report, format == FormatArg::Json, output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Domain(_) => ExitCode::from(1),
                CliError::Usage(_) => ExitCode::from(2),
            }
        }
    }
}
