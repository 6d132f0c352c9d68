use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use retrocav::billiard::DEFAULT_MAX_REFLECTIONS;
use retrocav::resistance::INTEGRATION_MAX_REFLECTIONS;
use serde::{Deserialize, Serialize};

/// Version of the JSON and CSV layouts written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (output schema 1)");

const SHAPE_HELP: &str = "Shape: an alias (flat, double_parabola, triangle_notch, \
rect_notch:<depth>, quadratic:<h>,<beta>), a JSON shape-spec file, or inline JSON";

#[derive(Debug, Parser)]
#[command(name = "retrocav", version = LONG_VERSION)]
#[command(about = "Billiard retroreflection and Newtonian resistance of 2D cavities")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Resistance of one cavity.
    Resist(ResistArgs),
    /// Resistance of a disc whose boundary is tiled with identical cavities.
    Body(BodyArgs),
    /// Maximize resistance over a parametric shape family.
    Optimize(OptimizeArgs),
    /// Reflection-count census over seeded random entries.
    Census(CensusArgs),
    /// Integrand or deviation values on a grid of entry states.
    Grid(GridArgs),
    /// Follow one trajectory.
    Trace(TraceArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Output {
    /// Directory for output files and the run manifest.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    Midpoint,
    Simpson,
    /// Monte-Carlo.
    Mc,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Integration {
    #[arg(long, default_value_t = 1000)]
    pub nx: usize,
    #[arg(long, default_value_t = 1000)]
    pub nphi: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Midpoint)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: usize,
    /// Monte-Carlo seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = INTEGRATION_MAX_REFLECTIONS)]
    pub max_reflections: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ResistArgs {
    #[arg(help = SHAPE_HELP)]
    pub shape: String,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BodyArgs {
    #[arg(help = SHAPE_HELP)]
    pub shape: String,
    /// Number of cavities around the disc.
    #[arg(long, default_value_t = 42)]
    pub cavities: usize,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    /// Parameters (h, beta).
    Quadratic,
    /// `k` segments; parameters are the interior vertices.
    Polyline,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Quadratic)]
    pub family: FamilyArg,
    /// Segments of the polyline family.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Bounds as comma-separated lo:hi pairs, one per parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Score of parameters that do not describe a valid cavity.
    #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
    pub penalty: f64,
    /// Evaluations per run for the polishing search.
    #[arg(long, default_value_t = 400)]
    pub budget: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 8)]
    pub multistart: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Grid side of the polishing objective.
    #[arg(long, default_value_t = 500)]
    pub grid: usize,
    #[arg(long, default_value_t = 2000)]
    pub rescore_grid: usize,
    /// Evaluations per run for the restarted exploration; 0 disables it.
    #[arg(long, default_value_t = 400)]
    pub explore_budget: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub explore_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub explore_grid: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CensusArgs {
    #[arg(help = SHAPE_HELP)]
    pub shape: String,
    #[arg(short = 'n', long = "samples", default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridWhat {
    /// `G(x, φ) = (1 + cos(φ⁺ − φ)) cos φ`.
    Integrand,
    /// `φ − φ⁺` in degrees.
    Deviation,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(help = SHAPE_HELP)]
    pub shape: String,
    #[arg(long, default_value_t = 100)]
    pub nx: usize,
    #[arg(long, default_value_t = 100)]
    pub nphi: usize,
    #[arg(long, value_enum, default_value_t = GridWhat::Integrand)]
    pub what: GridWhat,
    #[arg(long, default_value_t = INTEGRATION_MAX_REFLECTIONS)]
    pub max_reflections: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TraceArgs {
    #[arg(help = SHAPE_HELP)]
    pub shape: String,
    /// Entry abscissa in (-1/2, 1/2).
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Entry angle in degrees, in (-90, 90).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_REFLECTIONS)]
    pub max_reflections: usize,
    /// Write the polyline of the trajectory as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: Output,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub out: Output,
}
