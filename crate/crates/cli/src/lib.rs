//! Command-line front end: reads scenario, sweep, calibration and
//! measurement files and writes deterministic JSON and CSV artifacts.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 infeasible slot or
//! degenerate fit, 3 invalid plan.

pub mod args;
pub mod commands;
pub mod files;
pub mod output;

use anyhow::Result;

pub use args::{Cli, Command};
pub use commands::{EXIT_DEGENERATE, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

/// Runs a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Plan(a) => commands::plan(a),
        Command::Validate(a) => commands::validate(a),
        Command::Feasibility(a) => commands::feasibility(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Fit(a) => commands::fit(a),
        Command::Generate(a) => commands::generate(a),
        Command::Calibration => commands::calibration(),
    }
}
