//! The joint server-activation and lossless-migration problem.
//!
//! Decision variables are the flow tensor `x[k][s][t]` (xApps of class `k`
//! moving from `s` to `t`, where `t == s` means staying) and the activation
//! vector `mu`. Index `S` (one past the last physical server) is the staging
//! server that holds the xApps awaiting deployment.
//!
//! Three solvers share the same feasibility check and objective:
//! [`solve_bnb`] (exact branch-and-bound), [`solve_bruteforce`] (exhaustive
//! oracle for tiny instances) and [`solve_greedy`] (best-fit heuristic).

mod bnb;
mod bruteforce;
mod greedy;
mod plan;
mod realize;
mod relaxation;
mod validate;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationSet;
use crate::error::{Error, Result};
use crate::model::types::{ClusterState, ScenarioParams, Strategy};
use crate::model::{self, ModelContext};

pub use bnb::solve_bnb;
pub use bruteforce::{search_space_estimate, solve_bruteforce};
pub use greedy::solve_greedy;
pub use plan::{MigrationPlan, SolveOutcome, SolveReport, SolveStatus, TracePoint};
pub use validate::{validate_plan, Constraint, Verdict, Violation};

/// Flow tensor `x[k][s][t]`.
pub type Flows = Vec<Vec<Vec<u32>>>;

/// Limits shared by the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    /// Stop once the relative gap falls to this value.
    pub gap_target: f64,
    /// Optional cap on explored branch-and-bound nodes.
    pub node_limit: Option<u64>,
    /// Largest search space the exhaustive solver accepts.
    pub bruteforce_cap: u64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self {
            time_limit: 300.0,
            gap_target: 0.0,
            node_limit: None,
            bruteforce_cap: 10_000_000,
        }
    }
}

impl SolveLimits {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = seconds;
        self
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap_target = gap;
        self
    }

    pub(crate) fn time_budget(&self) -> Duration {
        Duration::try_from_secs_f64(self.time_limit.max(0.0)).unwrap_or(Duration::MAX)
    }
}

/// Which solver answers a planning problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Bnb,
    Bruteforce,
    Greedy,
}

impl SolverChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverChoice::Bnb => "bnb",
            SolverChoice::Bruteforce => "bruteforce",
            SolverChoice::Greedy => "greedy",
        }
    }

    pub fn solve(self, problem: &SalProblem, limits: &SolveLimits) -> Result<SolveOutcome> {
        match self {
            SolverChoice::Bnb => solve_bnb(problem, limits),
            SolverChoice::Bruteforce => solve_bruteforce(problem, limits),
            SolverChoice::Greedy => solve_greedy(problem),
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bnb" => Ok(SolverChoice::Bnb),
            "bruteforce" => Ok(SolverChoice::Bruteforce),
            "greedy" => Ok(SolverChoice::Greedy),
            other => Err(Error::InvalidParams(format!("unknown solver `{other}`"))),
        }
    }
}

/// A fully specified planning problem.
#[derive(Debug, Clone)]
pub struct SalProblem {
    pub state: ClusterState,
    pub params: ScenarioParams,
    pub cal: CalibrationSet,
    /// Exceeds the number of xApps any feasible plan can move.
    pub big_m: u32,
    pub ctx: ModelContext,
}

/// Builds the problem for a state whose undeployments have been applied and
/// whose deployments are staged.
pub fn build_problem(state: &ClusterState, params: &ScenarioParams, cal: &CalibrationSet) -> Result<SalProblem> {
    state.validate()?;
    params.validate()?;
    if state.pending_undeploys.iter().any(|&n| n > 0) {
        return Err(Error::InvalidState(
            "pending undeployments must be applied before planning".into(),
        ));
    }
    let ctx = ModelContext::for_state(state, params, cal)?;
    let total: u32 = state.final_totals().iter().sum();
    Ok(SalProblem {
        state: state.clone(),
        params: params.clone(),
        cal: cal.clone(),
        big_m: total + 1,
        ctx,
    })
}

impl SalProblem {
    pub fn class_count(&self) -> usize {
        self.state.class_count()
    }

    /// Number of physical servers.
    pub fn server_count(&self) -> usize {
        self.state.server_count()
    }

    /// Index of the staging server.
    pub fn staging(&self) -> usize {
        self.server_count()
    }

    pub fn strategy(&self) -> Strategy {
        self.params.strategy
    }

    /// Initial count of class `k` at `s`, staging server included.
    pub fn n0(&self, k: usize, s: usize) -> u32 {
        if s == self.staging() {
            self.state.pending_deploys[k]
        } else {
            self.state.initial_counts[k][s]
        }
    }

    pub fn x_len(&self) -> usize {
        let n = self.server_count() + 1;
        self.class_count() * n * n
    }

    pub fn mu_len(&self) -> usize {
        self.server_count()
    }

    pub fn optional_servers(&self) -> Vec<usize> {
        (0..self.server_count())
            .filter(|&s| self.state.servers[s].optional)
            .collect()
    }

    /// Constraints enforced for this problem's strategy.
    pub fn constraints(&self) -> Vec<Constraint> {
        Constraint::ALL
            .into_iter()
            .filter(|c| c.applies_to(self.strategy()))
            .collect()
    }

    pub fn has_constraint(&self, c: Constraint) -> bool {
        c.applies_to(self.strategy())
    }

    /// Flow tensor in which every xApp stays put and nothing is deployed.
    pub fn empty_flows(&self) -> Flows {
        let n = self.server_count() + 1;
        vec![vec![vec![0; n]; n]; self.class_count()]
    }

    /// Total energy of a plan, without checking feasibility.
    pub fn objective(&self, x: &Flows, mu: &[bool]) -> Result<f64> {
        Ok(model::cluster_energy_in(&self.ctx, &self.state, x, mu)?.total)
    }

    /// Energy of a plan if it is feasible.
    pub fn feasible_objective(&self, x: &Flows, mu: &[bool]) -> Result<Option<f64>> {
        let verdict = validate_plan(self, x, mu)?;
        if !verdict.valid {
            return Ok(None);
        }
        self.objective(x, mu).map(Some)
    }

    /// The backend maintenance check, when it fails.
    pub(crate) fn sdl_failure(&self) -> Option<String> {
        let sdl = self.ctx.sdl?;
        if sdl.feasible {
            return None;
        }
        Some(format!(
            "backend defrag downtime {:.6} s violates {} (limit {} s) or {} (active time {:.6} s)",
            sdl.defrag_downtime,
            Constraint::SdlDefrag,
            self.params.max_defrag_downtime,
            Constraint::SdlActiveTime,
            sdl.active_time
        ))
    }
}

/// Evaluates the plan given by a solver, for callers that only need the
/// objective.
pub fn objective_eval(problem: &SalProblem, plan: &MigrationPlan) -> Result<f64> {
    problem.objective(&plan.x, &plan.mu)
}
