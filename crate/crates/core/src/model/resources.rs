//! Per-server resource consumption.

use super::context::ModelContext;
use super::types::Resource;
use crate::calibration::Metric;

/// Consumption of `resource` by the migration strategy on one server.
pub fn strategy_overhead(
    ctx: &ModelContext,
    resource: Resource,
    active: bool,
    participates: bool,
) -> f64 {
    ctx.overhead(Metric::from(resource), active, participates)
}

/// `[CPU, MEM, DISK]` used by a server hosting `hosted` xApps per class.
pub fn server_resources(
    ctx: &ModelContext,
    hosted: &[u32],
    active: bool,
    participates: bool,
) -> [f64; 3] {
    ctx.resources(hosted, active, participates)
}
