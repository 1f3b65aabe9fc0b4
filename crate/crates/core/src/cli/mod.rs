//! Command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 a validation or
//! conjugacy check failed, 3 the weights could not be extracted, 4 the
//! requested fit degree is too high for the grid, 5 any other runtime failure.

mod commands;
pub mod format;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{exit_code, run};

#[derive(Debug, Parser)]
#[command(name = "cstar-linac", version, about = "Linearize holomorphic C*-actions near a fixed point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the group law (closed form) or periodicity (vector field).
    Check {
        spec: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the weights and the type of the fixed point.
    Classify {
        spec: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the linearizing map and certify the conjugacy.
    Linearize(LinearizeArgs),
    /// Re-run the conjugacy certificate for a stored map.
    Verify {
        spec: PathBuf,
        linearizer: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Largest accepted conjugacy residual.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Extend the linearizer along orbits to a list of points.
    Extend(ExtendArgs),
    /// Sample an orbit along a polygonal path of group parameters, as CSV.
    Orbit(OrbitArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Print the full JSON report instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Symbolic for closed forms, numeric for vector fields.
    Auto,
    Symbolic,
    Numeric,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum, default_value_t = Backend::Auto)]
    pub backend: Backend,
    /// Total degree of the fitted polynomial (numeric backend).
    #[arg(long, default_value_t = 3)]
    pub max_deg: u32,
    /// Initial number of quadrature nodes.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Use exactly `--nodes` nodes.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, default_value_t = 0.4)]
    pub grid_radius: f64,
    #[arg(long)]
    pub points_per_axis: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LinearizeArgs {
    pub spec: PathBuf,
    #[command(flatten)]
    pub build: BuildArgs,
    /// Write the map to this file.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    pub spec: PathBuf,
    /// JSON list of points, each a list of [re, im] pairs.
    #[arg(long, value_name = "PATH")]
    pub points: PathBuf,
    /// Stored map; built from the action when omitted.
    #[arg(long, value_name = "PATH")]
    pub linearizer: Option<PathBuf>,
    #[command(flatten)]
    pub build: BuildArgs,
    /// Contraction doublings to try.
    #[arg(long, default_value_t = crate::extend::DEFAULT_BUDGET)]
    pub budget: u32,
    /// Skip the injectivity search and use this radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    pub spec: PathBuf,
    /// Start point as re,im,re,im,...
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Path vertex re,im after the implicit start z = 0; repeatable.
    #[arg(long = "path", required = true, allow_hyphen_values = true)]
    pub path: Vec<String>,
    /// Samples per path segment.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
