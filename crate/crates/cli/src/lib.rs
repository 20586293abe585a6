//! Library side of the `secrecy-relay` command-line tool: flag parsing,
//! sweep evaluation, figure presets and CSV/JSON emission.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::Context;

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;

pub use config::{Cli, CliCommand, Command, OutputFormat, RunConfig, Sweep, SweepVar};
pub use output::{Output, Table};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "SECRECY_RELAY_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameters; exit code 2.
    Validation(String),
    /// A numerical routine failed at a grid point; exit code 3.
    Numerical(String),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }

    pub(crate) fn from_validation(err: secrecy_relay::Error) -> Self {
        Self::Validation(err.to_string())
    }

    /// Classify a library error raised while evaluating `point`.
    pub(crate) fn at(point: &str, err: secrecy_relay::Error) -> Self {
        match err {
            secrecy_relay::Error::InvalidParameter { .. } => Self::Validation(format!("at {point}: {err}")),
            other => Self::Numerical(format!("at {point}: {other}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "invalid configuration: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure {m}"),
            Self::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Io(e)
    }
}

/// Size the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

/// Read the `config` object of a previous JSON output (or a bare config).
pub fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let config = value.get("config").cloned().unwrap_or(value);
    let run: RunConfig =
        serde_json::from_value(config).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    run.validate()?;
    Ok(run)
}

/// Resolve flags into a run configuration.
pub fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    if let Some(path) = &cli.args.from_json {
        let mut run = load_config(path)?;
        if let Some(f) = cli.args.format {
            run.format = f;
        }
        run.out = cli.args.out.clone();
        return Ok(run);
    }
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| Failure::Validation("a subcommand or --from-json is required".into()))?;
    cli.args.resolve(command)
}

pub fn execute(run: &RunConfig) -> Result<Output, Failure> {
    let (table, diagnostics) = match &run.command {
        Command::Pto | Command::Pso | Command::Throughput => commands::sweep(run)?,
        Command::Optimize => commands::optimize(run)?,
        Command::Figure { id, curves } => figures::figure(run, *id, curves)?,
    };
    Ok(Output {
        config: run.clone(),
        table,
        diagnostics,
    })
}

/// Parse, evaluate and write: the whole binary.
pub fn run(cli: &Cli) -> Result<(), Failure> {
    let run = resolve(cli)?;
    let out = execute(&run)?;
    let text = match run.format {
        OutputFormat::Csv => out.to_csv()?,
        OutputFormat::Json => out.to_json()?,
    };
    match &run.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
