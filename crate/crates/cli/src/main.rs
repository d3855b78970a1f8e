//! `membrane`: evaluate, minimize and sweep the coupled membrane energy.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage
//! error, 3 invariant violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "membrane", version, about = "Phase-field membrane energy toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file: a sweep description for `sweep`, fixed parameters otherwise.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for written artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of grid points (even, at least 8).
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Double-well potential: quartic, quadratic or logarithmic.
    #[arg(long)]
    pub well: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Flat,
    SingleTransition,
    Oscillatory,
    Udelta,
    MollifiedStep,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy of a profile, with the height eliminated optimally.
    Evaluate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "flat")]
        profile: ProfileKind,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// CSV with a `u` column (one row per grid point); overrides --profile.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Multi-start minimization of the reduced energy.
    Minimize {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 3)]
        random_starts: usize,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol_grad: Option<f64>,
    },
    /// Sample an analytic construction and report its energies.
    Construct {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "oscillatory")]
        kind: ProfileKind,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Fractional seminorm against Modica–Mortola energy on the sharp-transition family.
    Interpolate {
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        s: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        #[arg(long)]
        well: Option<String>,
    },
    /// Kernel split and fitted nonlocal constant on the torus.
    Clement {
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
        d: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        l: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [4.0, 8.0, 16.0])]
        m: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
        delta: Vec<f64>,
        #[arg(long)]
        well: Option<String>,
    },
    /// Run a sweep described by --config and write the report.
    Sweep,
    /// Regime label of a parameter point.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        c_small: Option<f64>,
        #[arg(long)]
        c_big: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
