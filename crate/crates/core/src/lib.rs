//! Energy-aware planning of xApp migrations and server activation on a
//! near-RT RIC cluster.
//!
//! The crate is split along the data flow of one planning slot:
//!
//! * [`calibration`] holds the fitted coefficients that drive every model.
//! * [`model`] evaluates timing, resource and energy figures for a placement.
//! * [`solver`] builds and solves the joint server-activation and migration
//!   problem (exact branch-and-bound, exhaustive oracle, greedy heuristic).
//! * [`orchestrator`] runs the slot loop, the load-balancing baseline and the
//!   feasibility / energy sweeps.

pub mod calibration;
pub mod error;
pub mod model;
pub mod orchestrator;
pub mod solver;

pub use calibration::CalibrationSet;
pub use error::{Error, Result};
pub use model::types::{
    ClusterState, KpiBundle, Resource, ScenarioParams, ServerSpec, Strategy, XAppClass, MB,
};
pub use solver::{MigrationPlan, SalProblem, SolveLimits, SolveReport, SolveStatus, SolverChoice};
