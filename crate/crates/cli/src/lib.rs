//! Command-line front end: configuration, sweeps, thresholds, oracle
//! validation and replay of earlier runs.
//!
//! Parameters are resolved in increasing precedence from built-in defaults,
//! the `--config` file, `--set key=value` overrides and dedicated flags such
//! as `--seed`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{parse_config, parse_override, ConfigMap};
use error::{CliError, Result};
use output::{parse_output_header, render, Format};
use settings::{Command, Settings, ThresholdKind};

#[derive(Debug, Parser)]
#[command(
    name = "brightcv",
    version,
    about = "Bright-light homodyne noise in squeezing, entanglement and CV-QKD"
)]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for oracle commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Key rate along a sweep of one parameter.
    SweepKeyRate,
    /// Logarithmic negativity along a sweep of one parameter.
    SweepEntanglement,
    /// Closed-form and numerically located thresholds.
    Threshold {
        #[arg(value_enum)]
        kind: ThresholdKind,
    },
    /// Brightness that maximizes the key rate.
    OptimizeN,
    /// Compare the detector model with the phase-space oracle.
    OracleValidate,
    /// Re-run the command recorded in an output file's header.
    Replay { file: PathBuf },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn gather(cli: &Cli) -> Result<ConfigMap> {
    let mut map = match &cli.config {
        Some(path) => parse_config(&read(path)?)?,
        None => ConfigMap::new(),
    };
    for s in &cli.set {
        let (k, v) = parse_override(s)?;
        map.insert(k, v);
    }
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), seed.to_string());
    }
    Ok(map)
}

/// Reconstructs the command and parameters stored in an output file.
pub fn replay_source(text: &str) -> Result<(Command, ConfigMap, Format)> {
    let header = parse_output_header(text)?;
    let command = header
        .get("command")
        .ok_or_else(|| CliError::config("command", "missing from header"))?;
    let command = Command::from_parts(command, header.get("kind"))?;
    let map = header
        .entries
        .iter()
        .filter(|(k, _)| {
            !matches!(k.as_str(), "generator" | "command" | "kind") && !k.starts_with("convention.")
        })
        .cloned()
        .collect();
    Ok((command, map, header.format))
}

fn dispatch(cli: &Cli) -> Result<(String, Option<CliError>)> {
    let (command, map, detected) = match &cli.command {
        Cmd::Replay { file } => {
            if cli.config.is_some() || !cli.set.is_empty() || cli.seed.is_some() {
                return Err(CliError::Usage(
                    "replay takes every parameter from the file header; drop --config, --set and --seed".into(),
                ));
            }
            let (c, m, f) = replay_source(&read(file)?)?;
            (c, m, Some(f))
        }
        other => {
            let command = match other {
                Cmd::SweepKeyRate => Command::SweepKeyRate,
                Cmd::SweepEntanglement => Command::SweepEntanglement,
                Cmd::Threshold { kind } => Command::Threshold(*kind),
                Cmd::OptimizeN => Command::OptimizeN,
                Cmd::OracleValidate => Command::OracleValidate,
                Cmd::Replay { .. } => unreachable!(),
            };
            (command, gather(cli)?, None)
        }
    };
    let settings = Settings::resolve(command, &map)?;
    let format = cli.format.or(detected).unwrap_or(Format::Csv);
    let outcome = commands::execute(command, &settings)?;
    Ok((render(&outcome.report, format), outcome.failure))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn run_parsed(cli: &Cli) -> Result<()> {
    let work = || -> Result<()> {
        let (text, failure) = dispatch(cli)?;
        emit(cli, &text)?;
        failure.map_or(Ok(()), Err)
    };
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Runs the program and returns its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_parsed(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
