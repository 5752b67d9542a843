mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use singstrat::Error;

use crate::commands::Outcome;
use crate::config::Config;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "singstrat", version, about = "Density, stratification and energy analysis of Riesz-subharmonic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point densities on a radius ladder, or quotients on a lattice when `grid_step` is set.
    Density(Args),
    /// Quantitative strata and their tube volumes.
    Strata(Args),
    /// F- and G-energy profiles with monotonicity verdicts.
    Energy(Args),
    /// Tube volumes of the high-density set against the Laplacian mass bound.
    Minkowski(Args),
    /// Multiscale decomposition covering with per-scale ball counts.
    Cover(Args),
    /// Connected components of the high-density set.
    Count(Args),
    /// Runs the acceptance criteria; exits 0 iff all selected criteria pass.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML config with [field], [analysis], [quadrature] and [output] sections.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` or `--section.key value`; values are parsed as TOML.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Domain(_) | Error::Scale { .. } | Error::MemoryGuard(_) | Error::Resolution(_)) => 3,
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    config_hash: String,
    seed: u64,
    config: Value,
    field: Option<String>,
    quadrature: Vec<QuadratureEntry>,
    tolerances: Value,
    result: Value,
}

#[derive(Serialize)]
struct QuadratureEntry {
    role: String,
    sphere_nodes: usize,
    shells: usize,
    ball_sphere_nodes: usize,
    max_candidates: usize,
    seed: u64,
}

fn execute(name: &str, cfg: &Config) -> Result<(Outcome, Option<String>), CliError> {
    if name == "verify" {
        return Ok((commands::verify_cmd(cfg)?, None));
    }
    let u = config::build_field(&cfg.field)?;
    let out = match name {
        "density" => commands::density_cmd(cfg, &u)?,
        "strata" => commands::strata_cmd(cfg, &u)?,
        "energy" => commands::energy_cmd(cfg, &u)?,
        "minkowski" => commands::minkowski_cmd(cfg, &u)?,
        "cover" => commands::cover_cmd(cfg, &u)?,
        "count" => commands::count_cmd(cfg, &u)?,
        _ => unreachable!("clap restricts subcommands"),
    };
    Ok((out, Some(u.label().to_string())))
}

fn run(name: &str, args: &Args) -> Result<bool, CliError> {
    let cfg = config::load(args.config.as_deref(), &args.overrides)?;
    let (outcome, label) = execute(name, &cfg)?;
    let seed =
        if name == "verify" { cfg.quadrature.seed.unwrap_or(singstrat::verify::DEFAULT_SEED) } else { cfg.quadrature.seed() };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: name,
        config_hash: config::config_hash(&cfg),
        seed,
        config: config::hashed_view(&cfg),
        field: label,
        quadrature: outcome
            .quadrature
            .iter()
            .map(|(role, q)| QuadratureEntry {
                role: role.clone(),
                sphere_nodes: q.sphere_nodes,
                shells: q.shells,
                ball_sphere_nodes: q.ball_sphere_nodes,
                max_candidates: q.max_candidates,
                seed: q.seed,
            })
            .collect(),
        tolerances: outcome.tolerances,
        result: outcome.result,
    };
    let mut text = if cfg.output.pretty { serde_json::to_string_pretty(&report) } else { serde_json::to_string(&report) }
        .expect("report serializes");
    text.push('\n');
    match &cfg.output.json {
        Some(path) => std::fs::write(path, &text).map_err(CliError::Io)?,
        None => print!("{text}"),
    }
    if let Some(path) = &cfg.output.csv {
        std::fs::write(path, outcome.csv.render()).map_err(CliError::Io)?;
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Density(a) => ("density", a),
        Command::Strata(a) => ("strata", a),
        Command::Energy(a) => ("energy", a),
        Command::Minkowski(a) => ("minkowski", a),
        Command::Cover(a) => ("cover", a),
        Command::Count(a) => ("count", a),
        Command::Verify(a) => ("verify", a),
    };
    match run(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("singstrat {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
