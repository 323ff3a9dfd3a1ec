//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sal_core::{SolverChoice, Strategy};

#[derive(Debug, Parser)]
#[command(name = "sal", version, about = "Server activation and lossless xApp migration planner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one planning slot and write the plan and solve report.
    Plan(PlanArgs),
    /// Check a plan against a scenario and list violated constraints.
    Validate(ValidateArgs),
    /// Feasibility of every grid point of a sweep file, as CSV.
    Feasibility(SweepArgs),
    /// Energy gain over the load-balanced baseline per grid point, as CSV.
    Sweep(SweepArgs),
    /// Least-squares fit of an affine coefficient pair from a measurement CSV.
    Fit(FitArgs),
    /// Write a random scenario file.
    Generate(GenerateArgs),
    /// Print the shipped calibration as a JSON document.
    Calibration,
}

/// Overrides shared by the solving commands.
#[derive(Debug, Args, Clone, Default)]
pub struct SolveFlags {
    /// Calibration document; shipped defaults when absent.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Migration strategy, overriding the input file.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Solver wall-clock budget in seconds [default: 300].
    #[arg(long = "time-limit", value_name = "SECONDS")]
    pub time_limit: Option<f64>,
    /// Stop once the relative optimality gap reaches this fraction.
    #[arg(long, value_name = "FRAC")]
    pub gap: Option<f64>,
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<SolverChoice>,
    /// Include wall-clock runtimes in the artifacts (makes them
    /// non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub flags: SolveFlags,
    /// Directory receiving `plan.json` and `report.json`; both go to
    /// standard output as one document when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// A `plan.json` or the combined document printed by `plan`.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep file.
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub flags: SolveFlags,
    /// Directory receiving the CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with `predictor,response` columns.
    #[arg(long)]
    pub measurements: PathBuf,
    /// Name of the fitted coefficient pair, e.g. `delta_D`.
    #[arg(long, default_value = "fit")]
    pub label: String,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub servers: usize,
    /// Total deployed xApps.
    #[arg(long, default_value_t = 10)]
    pub xapps: u32,
    /// Comma-separated reference class ids.
    #[arg(long, default_value = "A", value_delimiter = ',')]
    pub classes: Vec<String>,
    /// xApps awaiting deployment.
    #[arg(long, default_value_t = 0)]
    pub staged: u32,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Directory receiving `scenario.json`; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    s.parse::<SolverChoice>().map_err(|e| e.to_string())
}
