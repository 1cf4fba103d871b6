//! `pendulum`: command-line driver for the winding-number eigenvalue solver.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 suspect
//! intervals in the eigenvalue search, 3 singular construction, 4 failed
//! verification.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pendulum_core::Error;

use config::{override_spec, parse_param, Command, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Suspects(usize),
    Singular(String),
    VerifyFailed(usize),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Runtime(_) => 1,
            CliError::Suspects(_) => 2,
            CliError::Singular(_) => 3,
            CliError::VerifyFailed(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(msg) => format!("config error: {msg}"),
            CliError::Suspects(n) => format!("{n} suspect interval(s) in the eigenvalue search"),
            CliError::Singular(msg) => format!("singular construction: {msg}"),
            CliError::VerifyFailed(n) => format!("{n} verification check(s) failed"),
            CliError::Runtime(msg) => format!("error: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularConstruction { .. } => CliError::Singular(e.to_string()),
            Error::UnknownCatalog(_)
            | Error::InvalidParameter(_)
            | Error::InvalidCurve(_)
            | Error::NegativeLambda(_)
            | Error::NoFixedPoints(_)
            | Error::NotWellShaped(_)
            | Error::GridTooCoarse(_)
            | Error::NonMonotoneGrid(_)
            | Error::Csv(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pendulum",
    version,
    about = "Schrödinger bound states by pendulum winding numbers"
)]
struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON run configuration. Flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: pendulum-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Catalog id: constant, sech_well, kink_well, ladder_well, linear_harmonic, custom_sampled.
    #[arg(long)]
    potential: Option<String>,
    /// Critical-curve id for `construct`: kink, sech, ladder, flat, arch.
    #[arg(long)]
    curve: Option<String>,
    /// Parameter for the potential (or the curve, for `construct`).
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, String)>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Bisection tolerance on lambda.
    #[arg(long)]
    tol_lambda: Option<f64>,
    /// Domain half-width L.
    #[arg(long)]
    half_width: Option<f64>,
    /// Samples in a winding scan.
    #[arg(long)]
    points: Option<usize>,
    /// Interior points of the finite-difference oracle.
    #[arg(long)]
    oracle_points: Option<usize>,
    /// Levels requested from the oracle.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.command = self.command.or(cfg.command);
        let command = cfg
            .command
            .ok_or_else(|| CliError::Config("no command given on the command line or in the config".into()))?;
        if command == Command::Construct {
            cfg.curve = override_spec(cfg.curve.take(), self.curve.as_deref(), &self.params);
        } else {
            cfg.potential = override_spec(cfg.potential.take(), self.potential.as_deref(), &self.params);
            if self.potential.is_some() {
                cfg.catalog = None;
            }
        }
        macro_rules! flag {
            ($($field:ident),*) => { $( if self.$field.is_some() { cfg.$field = self.$field; } )* };
        }
        flag!(
            lambda_min,
            lambda_max,
            tol,
            tol_lambda,
            half_width,
            points,
            oracle_points,
            levels,
            seed,
            threads
        );
        if self.out.is_some() {
            cfg.out = self.out;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.into_config()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match cfg.command.expect("command resolved in into_config") {
        Command::Solve => commands::solve(&cfg),
        Command::WindingScan => commands::winding_scan(&cfg),
        Command::Count => commands::count(&cfg),
        Command::Construct => commands::construct(&cfg),
        Command::ZsCheck => commands::zs_check(&cfg),
        Command::Oracle => commands::oracle(&cfg),
        Command::Verify => verify::verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pendulum: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
