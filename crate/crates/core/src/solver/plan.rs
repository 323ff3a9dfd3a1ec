use serde::{Deserialize, Serialize};

use super::{Flows, SalProblem};
use crate::error::Result;
use crate::model::types::KpiBundle;
use crate::model::{self, ServerEnergy};

/// Decision of a planning slot and its derived figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationPlan {
    /// `x[k][s][t]`; the last index on both axes is the staging server.
    pub x: Flows,
    pub mu: Vec<bool>,
    #[serde(default)]
    pub kpis: KpiBundle,
    /// Joules, one entry per physical server.
    #[serde(default)]
    pub server_energy: Vec<ServerEnergy>,
    /// Joules.
    #[serde(default)]
    pub energy: f64,
    /// Fraction of physical servers left active.
    #[serde(default)]
    pub activation_ratio: f64,
}

impl MigrationPlan {
    /// Computes the derived figures of `(x, mu)`.
    pub fn new(problem: &SalProblem, x: Flows, mu: Vec<bool>) -> Result<Self> {
        let ctx = &problem.ctx;
        let breakdown = model::cluster_energy_in(ctx, &problem.state, &x, &mu)?;
        let servers = model::evaluate_servers(ctx, &problem.state, &x, &mu)?;
        let k = problem.class_count();
        let per_class = |f: &dyn Fn(&model::ServerEvaluation, usize) -> f64| -> Vec<Vec<f64>> {
            (0..k)
                .map(|ki| servers.iter().map(|ev| f(ev, ki)).collect())
                .collect()
        };
        let kpis = KpiBundle {
            downtime: per_class(&|ev, ki| ctx.downtime.eval_count(ev.outgoing[ki])),
            migration_duration: per_class(&|ev, ki| ctx.duration.eval_count(ev.outgoing[ki])),
            instantiation_time: per_class(&|ev, ki| ctx.instantiation.eval_count(ev.instantiated[ki])),
            defrag_downtime: ctx.sdl.map_or(0.0, |s| s.defrag_downtime),
            active_time: ctx
                .sdl
                .map_or(problem.params.maintenance_period, |s| s.active_time),
        };
        let active = mu.iter().filter(|&&m| m).count();
        Ok(Self {
            activation_ratio: active as f64 / mu.len() as f64,
            energy: breakdown.total,
            server_energy: breakdown.per_server,
            kpis,
            x,
            mu,
        })
    }

    /// xApps of each class per physical server once the plan is applied.
    pub fn final_counts(&self) -> Vec<Vec<u32>> {
        let servers = self.mu.len();
        self.x
            .iter()
            .map(|m| {
                (0..servers)
                    .map(|t| m.iter().map(|row| row[t]).sum())
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// Stopped once the gap target was met.
    GapReached,
    /// Stopped by the time or node budget.
    TimeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapReached => "gap_reached",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Incumbent and global bound after some number of explored nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nodes: u64,
    pub incumbent: Option<f64>,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Joules; absent when no feasible plan was found.
    pub objective: Option<f64>,
    /// Certified bound on the optimum, joules. Absent for heuristics.
    pub lower_bound: Option<f64>,
    pub mip_gap: Option<f64>,
    pub runtime_s: f64,
    pub nodes_explored: u64,
    /// Why the instance is infeasible, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasibility: Option<String>,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

impl SolveReport {
    pub fn infeasible(reason: impl Into<String>, runtime_s: f64, nodes: u64) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            objective: None,
            lower_bound: None,
            mip_gap: None,
            runtime_s,
            nodes_explored: nodes,
            infeasibility: Some(reason.into()),
            trace: Vec::new(),
        }
    }

    /// `(objective - bound) / max(objective, eps)`.
    pub fn gap(objective: f64, lower_bound: f64) -> f64 {
        ((objective - lower_bound) / objective.abs().max(1e-9)).max(0.0)
    }
}

/// What a solver returns: a plan unless the instance is infeasible or no
/// plan was found in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub plan: Option<MigrationPlan>,
    pub report: SolveReport,
}
