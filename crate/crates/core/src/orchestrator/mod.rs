//! The per-slot planning loop: apply undeployments, stage deployments, solve,
//! and compare against the all-on load-balanced baseline.
//!
//! Sweeps over scenario grids live in [`sweep`].

mod sweep;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationSet;
use crate::error::{Error, Result};
use crate::model::types::{ClusterState, Resource, ScenarioParams};
use crate::solver::{build_problem, Flows, MigrationPlan, SalProblem, SolveLimits, SolveReport, SolverChoice};

pub use sweep::{class_mix, energy_sweep, feasibility_sweep, max_feasible, FeasibilityBound, SweepRow, SweepSpec};

/// Which servers lose xApps first when undeployments are applied. Optional
/// servers are always drained before mandatory ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndeployPolicy {
    #[default]
    MostLoadedFirst,
    LeastLoadedFirst,
}

/// Removes `n_minus[k]` xApps of each class, one at a time, re-ranking the
/// servers after every removal. Ties go to the lower server index.
pub fn apply_undeployments(state: &ClusterState, n_minus: &[u32], policy: UndeployPolicy) -> Result<ClusterState> {
    if n_minus.len() != state.class_count() {
        return Err(Error::InvalidState(format!(
            "expected {} undeployment counts, got {}",
            state.class_count(),
            n_minus.len()
        )));
    }
    let mut next = state.clone();
    for (k, &n) in n_minus.iter().enumerate() {
        if next.deployed(k) < n {
            return Err(Error::InvalidState(format!(
                "class {}: cannot remove {n} xApps, only {} deployed",
                state.classes[k].id,
                next.deployed(k)
            )));
        }
        for _ in 0..n {
            let pick = (0..next.server_count())
                .filter(|&s| next.initial_counts[k][s] > 0)
                .min_by(|&a, &b| {
                    let rank = |s: usize| {
                        let load = next.hosted_on(s) as i64;
                        let load = match policy {
                            UndeployPolicy::MostLoadedFirst => -load,
                            UndeployPolicy::LeastLoadedFirst => load,
                        };
                        (!next.servers[s].optional, load, s)
                    };
                    rank(a).cmp(&rank(b))
                })
                .expect("deployed count checked above");
            next.initial_counts[k][pick] -= 1;
        }
    }
    next.pending_undeploys = vec![0; state.class_count()];
    Ok(next)
}

/// Places `n_plus` on the staging server. Staging replaces, never adds to,
/// what was staged before.
pub fn stage_deployments(state: &ClusterState, n_plus: &[u32]) -> Result<ClusterState> {
    if n_plus.len() != state.class_count() {
        return Err(Error::InvalidState(format!(
            "expected {} deployment counts, got {}",
            state.class_count(),
            n_plus.len()
        )));
    }
    let mut next = state.clone();
    next.pending_deploys = n_plus.to_vec();
    Ok(next)
}

/// All servers on, existing xApps in place, staged xApps placed one at a
/// time where the resulting CPU utilization is lowest.
pub(crate) fn balanced_placement(problem: &SalProblem) -> std::result::Result<(Flows, Vec<bool>), String> {
    let ctx = &problem.ctx;
    let servers = problem.server_count();
    let staging = problem.staging();
    let mut x = problem.empty_flows();
    let mut hosted = vec![vec![0u32; problem.class_count()]; servers];
    for (k, xk) in x.iter_mut().enumerate() {
        for s in 0..servers {
            let n = problem.n0(k, s);
            xk[s][s] = n;
            hosted[s][k] = n;
        }
    }
    let fits = |s: usize, counts: &[u32]| {
        let used = ctx.resources(counts, true, false);
        Resource::ALL
            .iter()
            .all(|&r| used[r.index()] <= problem.state.servers[s].capacity(r) * (1.0 + 1e-9))
    };
    for s in 0..servers {
        if !fits(s, &hosted[s]) {
            return Err(format!("server {} is over capacity", problem.state.servers[s].id));
        }
    }
    let mut order: Vec<usize> = (0..servers).collect();
    order.sort_by(|&a, &b| problem.state.servers[a].id.cmp(&problem.state.servers[b].id));
    for k in 0..problem.class_count() {
        for _ in 0..problem.n0(k, staging) {
            let mut pick: Option<(f64, usize)> = None;
            for &t in &order {
                hosted[t][k] += 1;
                if fits(t, &hosted[t]) {
                    let cpu = ctx.resources(&hosted[t], true, false)[Resource::Cpu.index()]
                        / problem.state.servers[t].cpu_cap;
                    if pick.is_none_or(|(best, _)| cpu < best - 1e-12) {
                        pick = Some((cpu, t));
                    }
                }
                hosted[t][k] -= 1;
            }
            let Some((_, t)) = pick else {
                return Err(format!(
                    "no server can take another class {} xApp",
                    problem.state.classes[k].id
                ));
            };
            hosted[t][k] += 1;
            x[k][staging][t] += 1;
        }
    }
    Ok((x, vec![true; servers]))
}

/// The reference placement the optimized plan is compared against.
/// Pending undeployments are applied first with the default policy.
pub fn baseline_plan(state: &ClusterState, params: &ScenarioParams, cal: &CalibrationSet) -> Result<MigrationPlan> {
    let state = apply_undeployments(state, &state.pending_undeploys, UndeployPolicy::default())?;
    let problem = build_problem(&state, params, cal)?;
    baseline_for(&problem)
}

fn baseline_for(problem: &SalProblem) -> Result<MigrationPlan> {
    let (x, mu) = balanced_placement(problem).map_err(Error::BaselineInfeasible)?;
    match MigrationPlan::new(problem, x, mu) {
        Err(Error::ModelDomain(why)) => Err(Error::BaselineInfeasible(why)),
        other => other,
    }
}

/// Solver and policy knobs of one slot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotConfig {
    pub solver: SolverChoice,
    pub limits: SolveLimits,
    pub undeploy_policy: UndeployPolicy,
}

/// Outcome of one planning slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotResult {
    /// The cluster the plan refers to: undeployments applied, deployments
    /// staged.
    pub prepared: ClusterState,
    pub plan: Option<MigrationPlan>,
    pub report: SolveReport,
    pub baseline_energy: Option<f64>,
    /// Why the baseline could not be built, if it could not.
    pub baseline_issue: Option<String>,
    pub energy_gain: Option<f64>,
    pub activation_ratio: Option<f64>,
}

impl SlotResult {
    pub fn feasible(&self) -> bool {
        self.plan.is_some()
    }

    /// Cluster at the start of the next slot, or `None` when the slot had no
    /// plan.
    pub fn next_state(&self) -> Option<ClusterState> {
        let plan = self.plan.as_ref()?;
        let mut next = self.prepared.clone();
        next.initial_counts = plan.final_counts();
        next.initial_active = plan.mu.clone();
        next.pending_deploys = vec![0; next.class_count()];
        next.pending_undeploys = vec![0; next.class_count()];
        Some(next)
    }
}

/// Plans one slot: `state.pending_undeploys` are applied, the pending
/// deployments stay staged, and the plan is compared with the baseline.
pub fn run_timeslot(
    state: &ClusterState,
    params: &ScenarioParams,
    cal: &CalibrationSet,
    config: &SlotConfig,
) -> Result<SlotResult> {
    state.validate()?;
    let prepared = apply_undeployments(state, &state.pending_undeploys, config.undeploy_policy)?;
    let problem = build_problem(&prepared, params, cal)?;
    let outcome = config.solver.solve(&problem, &config.limits)?;
    let (baseline_energy, baseline_issue) = match baseline_for(&problem) {
        Ok(plan) => (Some(plan.energy), None),
        Err(Error::BaselineInfeasible(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let energy_gain = match (&outcome.plan, baseline_energy) {
        (Some(plan), Some(base)) if base > 0.0 => Some(1.0 - plan.energy / base),
        _ => None,
    };
    let activation_ratio = outcome.plan.as_ref().map(|p| p.activation_ratio);
    Ok(SlotResult {
        prepared,
        plan: outcome.plan,
        report: outcome.report,
        baseline_energy,
        baseline_issue,
        energy_gain,
        activation_ratio,
    })
}
