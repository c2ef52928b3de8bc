//! `melan` command-line front end.

mod commands;
mod config;
mod error;
mod output;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use melan::ModelVariant;

use crate::commands::Context;
use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "melan", version, about = "Suspension bridge deck under live load")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; the Wollmann span under p = 30 kN/m when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Number of mesh intervals (overrides `solver.n_intervals`).
    #[arg(long, global = true)]
    mesh: Option<usize>,
    /// full, simplified or timoshenko-young.
    #[arg(long, global = true)]
    variant: Option<ModelVariant>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the coupled problem and write the deflection profile.
    Solve,
    /// Tabulate the elongation map over a range of assumed elongations.
    GammaMap {
        /// `LO,HI` in m; defaults to `solver.gamma_bracket`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Regression run of the four reference cases against the embedded values.
    Table1,
    /// Report the uniqueness constants for the configured load.
    Check,
    /// Solve every model variant and tabulate the differences.
    Compare,
}

fn context(common: &Common) -> Result<Context, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &common.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(n) = common.mesh {
        cfg.solver.n_intervals = n;
    }
    if let Some(v) = common.variant {
        cfg.variant = v;
    }
    Context::new(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = context(&cli.common)?;
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::GammaMap { range, points } => {
            let range = match range.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(other) => return Err(CliError::Config(format!("--range takes LO,HI, got {other:?}"))),
            };
            commands::gamma_map(&ctx, range, points)
        }
        Command::Table1 => commands::table1(&ctx),
        Command::Check => commands::check(&ctx),
        Command::Compare => commands::compare(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
