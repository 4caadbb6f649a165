//! Command-line front end for `slitres-core`.

pub mod commands;
pub mod config;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use slitres_core::{Backend, Parity};

use crate::config::{OutputFormat, RunConfig};
use crate::output::Table;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Validation(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "slitres", version, about = "Resonances of subwavelength slits in a conducting slab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonances for every Fabry–Pérot index and branch in the config
    Resonances {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One coefficient c_mn or c_mn(D), in units of the slab thickness
    Kernel {
        /// Wavenumber as `re,im`
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        k: Complex64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Slit separation for the cross-slit coefficient
        #[arg(long = "D", allow_hyphen_values = true)]
        d: Option<f64>,
        #[arg(long, default_value = "quadrature")]
        backend: Backend,
        #[arg(long, default_value = "even", value_parser = parse_parity)]
        parity: Parity,
    },
    /// Truncated and closed-form α
    Alpha {
        #[arg(long)]
        modes: usize,
    },
    /// Order-law sweep comparing asymptotic and direct roots
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Descending slit widths
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        h_list: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re,im`, got {s:?}")),
    }
}

fn parse_parity(s: &str) -> Result<Parity, String> {
    match s {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(format!("unknown parity {s:?}")),
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(table: &Table, out: &Option<PathBuf>, format: OutputFormat) -> Result<(), CliError> {
    let mut w = open_out(out)?;
    table.write(&mut w, format)?;
    w.flush()?;
    Ok(())
}

fn emit_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let mut w = open_out(&None)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Resonances { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let (table, failures) = commands::resonances(&cfg)?;
            emit(&table, &out, cfg.output_format)?;
            if failures > 0 {
                return Err(CliError::Solver(format!(
                    "{failures} of {} rows failed",
                    table.rows.len()
                )));
            }
            Ok(())
        }
        Command::Kernel { k, h, m, n, d, backend, parity } => {
            emit_json(&commands::kernel(k, h, m, n, d, backend, parity)?)
        }
        Command::Alpha { modes } => emit_json(&commands::alpha(modes)?),
        Command::Validate { config, h_list, jobs, out } => {
            let cfg = RunConfig::load(&config)?;
            let (table, pass) = commands::validate(&cfg, &h_list, jobs)?;
            emit(&table, &out, cfg.output_format)?;
            if !pass {
                return Err(CliError::Validation("ratio-stability checks failed".into()));
            }
            Ok(())
        }
    }
}
