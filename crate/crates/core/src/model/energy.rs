//! Slot energy of individual servers and of a whole placement.
//!
//! A placement is the flow tensor `x[k][s][t]` over the physical servers
//! `0..S` plus the staging server at index `S`, which holds the xApps waiting
//! to be deployed and never consumes anything.

use serde::{Deserialize, Serialize};

use super::context::{ModelContext, ServerEnergy, ServerSlice};
use super::types::{ClusterState, Strategy};
use crate::calibration::{CalibrationSet, Metric};
use crate::error::{Error, Result};

/// Stateful migration energy for a summed migration time.
pub fn sm_migration_energy(strategy: Strategy, total_duration: f64, cal: &CalibrationSet) -> Result<f64> {
    if !strategy.is_stateful() {
        return Err(Error::ModelDomain(
            "sm_migration_energy requires a stateful strategy".into(),
        ));
    }
    Ok(cal.sm_overhead(strategy, Metric::Energy)? * total_duration)
}

/// Backend energy charged to one active server over the slot.
pub fn sdl_energy_per_server(ctx: &ModelContext) -> f64 {
    ctx.sdl_energy_per_server()
}

pub fn server_energy(ctx: &ModelContext, slice: &ServerSlice<'_>) -> Result<ServerEnergy> {
    ctx.server_energy(slice)
}

/// Per-class movement and derived figures of one physical server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerEvaluation {
    pub initial: Vec<u32>,
    pub outgoing: Vec<u32>,
    pub instantiated: Vec<u32>,
    pub hosted: Vec<u32>,
    pub active: bool,
    /// Summed downtime of outgoing migrations, seconds.
    pub downtime: f64,
    pub window_s: f64,
    /// `[CPU, MEM, DISK]` at slot end.
    pub resources: [f64; 3],
    /// `None` when the migration window does not fit in the slot.
    pub energy: Option<ServerEnergy>,
}

impl ServerEvaluation {
    pub fn participates(&self) -> bool {
        self.outgoing.iter().any(|&n| n > 0)
    }
}

/// Checks that `x` is `K x (S+1) x (S+1)` and `mu` has `S` entries.
pub fn check_dims(x: &[Vec<Vec<u32>>], mu: &[bool], classes: usize, servers: usize) -> Result<()> {
    let n = servers + 1;
    if x.len() != classes
        || x.iter().any(|m| m.len() != n || m.iter().any(|row| row.len() != n))
    {
        return Err(Error::DimensionMismatch(format!(
            "x must be {classes} x {n} x {n}"
        )));
    }
    if mu.len() != servers {
        return Err(Error::DimensionMismatch(format!(
            "mu must have {servers} entries, got {}",
            mu.len()
        )));
    }
    Ok(())
}

/// Evaluates every physical server of a placement.
pub fn evaluate_servers(
    ctx: &ModelContext,
    state: &ClusterState,
    x: &[Vec<Vec<u32>>],
    mu: &[bool],
) -> Result<Vec<ServerEvaluation>> {
    let classes = state.class_count();
    let servers = state.server_count();
    check_dims(x, mu, classes, servers)?;
    let staging = servers;
    let mut out = Vec::with_capacity(servers);
    for s in 0..servers {
        let initial: Vec<u32> = (0..classes).map(|k| state.initial_counts[k][s]).collect();
        let outgoing: Vec<u32> = (0..classes)
            .map(|k| (0..=servers).filter(|&t| t != s).map(|t| x[k][s][t]).sum())
            .collect();
        let instantiated: Vec<u32> = (0..classes).map(|k| x[k][staging][s]).collect();
        let hosted: Vec<u32> = (0..classes)
            .map(|k| (0..=servers).map(|t| x[k][t][s]).sum())
            .collect();
        let participates = outgoing.iter().any(|&n| n > 0);
        let slice = ServerSlice {
            initial: &initial,
            outgoing: &outgoing,
            instantiated: &instantiated,
            hosted: &hosted,
            active: mu[s],
        };
        let energy = match ctx.server_energy(&slice) {
            Ok(e) => Some(e),
            Err(Error::ModelDomain(_)) => None,
            Err(e) => return Err(e),
        };
        out.push(ServerEvaluation {
            downtime: ctx.server_downtime(&outgoing),
            window_s: ctx.window(&outgoing, &instantiated),
            resources: ctx.resources(&hosted, mu[s], participates),
            energy,
            initial,
            outgoing,
            instantiated,
            hosted,
            active: mu[s],
        });
    }
    Ok(out)
}

/// Total slot energy and its per-server split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub per_server: Vec<ServerEnergy>,
    pub total: f64,
}

pub fn cluster_energy_in(
    ctx: &ModelContext,
    state: &ClusterState,
    x: &[Vec<Vec<u32>>],
    mu: &[bool],
) -> Result<EnergyBreakdown> {
    let servers = evaluate_servers(ctx, state, x, mu)?;
    let mut per_server = Vec::with_capacity(servers.len());
    for (s, ev) in servers.iter().enumerate() {
        match ev.energy {
            Some(e) => per_server.push(e),
            None => {
                return Err(Error::ModelDomain(format!(
                    "server {}: migration window {} s exceeds slot length {} s",
                    state.servers[s].id, ev.window_s, ctx.slot_length
                )))
            }
        }
    }
    let total = per_server.iter().map(|e| e.total).sum();
    Ok(EnergyBreakdown { per_server, total })
}

/// Slot energy of the placement `x` with activation `mu`.
pub fn cluster_energy(
    state: &ClusterState,
    x: &[Vec<Vec<u32>>],
    mu: &[bool],
    params: &super::types::ScenarioParams,
    cal: &CalibrationSet,
) -> Result<EnergyBreakdown> {
    let ctx = ModelContext::for_state(state, params, cal)?;
    cluster_energy_in(&ctx, state, x, mu)
}
