//! Command-line pipeline for structure-matrix analysis.
//!
//! Every subcommand reads a consumption table (CSV), prints one
//! deterministic JSON report to stdout, and writes any CSV/SVG artifacts
//! into the output directory. Exit codes, documented in the README:
//! 0 success, 1 I/O, 2 usage, 3 parse, 4 structural/model, 5 convergence,
//! 6 domain, 7 numeric, 8 invariant sweep failed.

// `!(x > 0.0)` guards are deliberate: unlike `x <= 0.0`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CommandOutput, SpaceArg};
use config::{ModeArg, RunConfig, SolverArg};
use ecomat::Error;

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Io(_) => 1,
        CliError::Lib(err) => match err {
            Error::Parse(_) => 3,
            Error::Structural(_) | Error::Model(_) => 4,
            Error::Convergence { .. } => 5,
            Error::Domain(_) => 6,
            Error::Numeric(_) | Error::Overflow { .. } => 7,
        },
    }
}

#[derive(Parser)]
#[command(
    name = "ecomat",
    version,
    about = "Structure-matrix analysis: eigenpairs, Markov transforms, collapse simulation, \
             ranking, forecasting, and structure optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Consumption table (CSV: header `product,<labels...>`, then one row
    /// per product)
    table: PathBuf,
    /// Config file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arithmetic for stability runs
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Relative eigensolver tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Inverse-power shift offset relative to the C-W interval width
    #[arg(long)]
    shift_margin: Option<f64>,
    /// Iteration horizon for stability runs
    #[arg(long)]
    horizon: Option<usize>,
    /// Cumulative-mass threshold below which products are weak
    #[arg(long)]
    theta_weak: Option<f64>,
    /// Cumulative-mass threshold from which products are pillars
    #[arg(long)]
    theta_pillar: Option<f64>,
    /// Relative growth-ratio deviation that counts as crisis
    #[arg(long)]
    crisis_threshold: Option<f64>,
    /// Directory for CSV/SVG artifacts (also: ECOMAT_OUTPUT_DIR)
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        cfg.apply_env();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.solver {
            cfg.solver = v;
        }
        if let Some(v) = self.shift_margin {
            cfg.shift_margin = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.theta_weak {
            cfg.theta_weak = v;
        }
        if let Some(v) = self.theta_pillar {
            cfg.theta_pillar = v;
        }
        if let Some(v) = self.crisis_threshold {
            cfg.crisis_threshold = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: irreducibility, period, positivity exponent,
    /// amplitude, C-W bounds at the all-ones vector
    Inspect(Common),
    /// Maximal eigenvalue with left and right eigenvectors
    Eigen(Common),
    /// Markov-chain transform with stationary distribution and dual chain
    Transform(Common),
    /// Iterate the economy and report collapse time and product; writes
    /// trajectory CSV and SVG
    Stability {
        #[command(flatten)]
        common: Common,
        /// Initial vector, comma-separated decimals (read exactly)
        #[arg(long)]
        initial: String,
        /// Iterate the structure matrix (a) or its chain (p)
        #[arg(long, value_enum, default_value = "a")]
        space: SpaceArg,
    },
    /// Rank products by the chain equilibrium
    Rank(Common),
    /// Weak/intermediate/pillar classification; writes the CDF chart
    Classify(Common),
    /// Growth-rate and consumption-parameter conversions, available
    /// consumption, and the maximal feasible consumption search
    Forecast {
        #[command(flatten)]
        common: Common,
        /// Target growth rate
        #[arg(long)]
        delta: Option<f64>,
        /// Consumption parameter
        #[arg(long)]
        alpha: Option<f64>,
        /// Current-year output vector
        #[arg(long)]
        x_n: Option<String>,
        /// Planned consumption vector (requires --x-n)
        #[arg(long)]
        planned: Option<String>,
    },
    /// Build the structure matrix with a target equilibrium and verify the
    /// invariance of its chain
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Target equilibrium vector, comma-separated
        #[arg(long)]
        target: String,
        /// Consumption parameter of the source family
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Run the full property sweep against the given matrix
    CheckInvariants(Common),
}

fn run() -> Result<CommandOutput, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Inspect(c) => commands::inspect(&c.resolve()?, &c.table),
        Command::Eigen(c) => commands::eigen(&c.resolve()?, &c.table),
        Command::Transform(c) => commands::transform(&c.resolve()?, &c.table),
        Command::Stability { common, initial, space } => {
            commands::stability(&common.resolve()?, &common.table, initial, *space)
        }
        Command::Rank(c) => commands::rank(&c.resolve()?, &c.table),
        Command::Classify(c) => commands::classify_cmd(&c.resolve()?, &c.table),
        Command::Forecast { common, delta, alpha, x_n, planned } => commands::forecast(
            &common.resolve()?,
            &common.table,
            *delta,
            *alpha,
            x_n.as_deref(),
            planned.as_deref(),
        ),
        Command::Optimize { common, target, alpha } => {
            commands::optimize(&common.resolve()?, &common.table, target, *alpha)
        }
        Command::CheckInvariants(c) => commands::check_invariants(&c.resolve()?, &c.table),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(out) => {
            print!("{}", output::to_canonical_json(&out.json));
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
