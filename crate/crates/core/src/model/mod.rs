//! Timing, resource and energy models of a planning slot.
//!
//! Every function is pure. Stateful KPIs come straight from the
//! calibration set; resource and energy figures go through a
//! [`ModelContext`] that resolves all coefficients of a scenario once.
//! Count-driven affine terms are zero when the count is zero, and every
//! evaluated expression is floored at zero.

mod context;
mod energy;
mod kpi;
mod resources;
pub mod types;

pub use context::{ModelContext, ServerEnergy, ServerSlice};
pub use energy::{
    check_dims, cluster_energy, cluster_energy_in, evaluate_servers, sdl_energy_per_server,
    server_energy, sm_migration_energy, EnergyBreakdown, ServerEvaluation,
};
pub use kpi::{
    defrag_downtime, defrag_slopes, downtime, instantiation_time, migration_duration,
    sdl_downtime, sdl_feasible, sm_downtime, traffic_load, SdlFeasibility,
};
pub use resources::{server_resources, strategy_overhead};
