//! Constraint checks of a candidate plan.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Flows, SalProblem};
use crate::error::Result;
use crate::model::types::{Resource, Strategy};
use crate::model::{self, check_dims};

/// Relative slack granted to inequality checks on real-valued quantities.
const TOL: f64 = 1e-9;

/// Problem constraints, numbered as in the model formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Every xApp initially on a server goes somewhere.
    Conservation,
    /// Nothing moves onto the staging server.
    NoInflowToStaging,
    /// The staging server ends empty.
    StagingDrained,
    /// Only initially active servers send xApps.
    SourceActive,
    /// Only active servers host xApps.
    DestinationActive,
    /// An optional server stays on only if it hosts something.
    ActiveHostsLoad,
    /// Resource capacity.
    Capacity,
    /// Mandatory servers stay on.
    MandatoryActive,
    /// Per-server downtime budget of stateful migrations.
    SmDowntime,
    /// Backend defrag downtime budget.
    SdlDefrag,
    /// Backend availability within a maintenance period.
    SdlActiveTime,
    /// Migrations must fit in the slot.
    SlotWindow,
}

impl Constraint {
    pub const ALL: [Constraint; 12] = [
        Constraint::Conservation,
        Constraint::NoInflowToStaging,
        Constraint::StagingDrained,
        Constraint::SourceActive,
        Constraint::DestinationActive,
        Constraint::ActiveHostsLoad,
        Constraint::Capacity,
        Constraint::MandatoryActive,
        Constraint::SmDowntime,
        Constraint::SdlDefrag,
        Constraint::SdlActiveTime,
        Constraint::SlotWindow,
    ];

    /// Formulation number; the slot window has none.
    pub fn number(self) -> Option<u8> {
        match self {
            Constraint::Conservation => Some(12),
            Constraint::NoInflowToStaging => Some(13),
            Constraint::StagingDrained => Some(14),
            Constraint::SourceActive => Some(15),
            Constraint::DestinationActive => Some(16),
            Constraint::ActiveHostsLoad => Some(17),
            Constraint::Capacity => Some(18),
            Constraint::MandatoryActive => Some(19),
            Constraint::SmDowntime => Some(20),
            Constraint::SdlDefrag => Some(21),
            Constraint::SdlActiveTime => Some(22),
            Constraint::SlotWindow => None,
        }
    }

    pub fn applies_to(self, strategy: Strategy) -> bool {
        match self {
            Constraint::SmDowntime => strategy.is_stateful(),
            Constraint::SdlDefrag | Constraint::SdlActiveTime => !strategy.is_stateful(),
            _ => true,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "({n})"),
            None => f.write_str("(slot window)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.constraint, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn violates(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

fn exceeds(value: f64, limit: f64) -> bool {
    value > limit + TOL * limit.abs().max(1.0)
}

/// Checks every constraint of `problem` against `(x, mu)`. Dimension errors
/// are reported as errors; constraint violations are data.
pub fn validate_plan(problem: &SalProblem, x: &Flows, mu: &[bool]) -> Result<Verdict> {
    let classes = problem.class_count();
    let servers = problem.server_count();
    check_dims(x, mu, classes, servers)?;
    let staging = problem.staging();
    let state = &problem.state;
    let ctx = &problem.ctx;
    let mut out = Vec::new();
    let mut flag = |constraint: Constraint, detail: String| {
        out.push(Violation { constraint, detail });
    };
    let name = |s: usize| -> String {
        if s == staging {
            "staging".to_string()
        } else {
            state.servers[s].id.clone()
        }
    };

    for k in 0..classes {
        for s in 0..=servers {
            let sent: u32 = x[k][s].iter().sum();
            let n0 = problem.n0(k, s);
            if sent != n0 {
                flag(
                    Constraint::Conservation,
                    format!(
                        "class {} at {}: plan accounts for {sent} xApps, {n0} present",
                        state.classes[k].id,
                        name(s)
                    ),
                );
            }
        }
    }

    let inflow: u32 = (0..classes)
        .map(|k| (0..servers).map(|s| x[k][s][staging]).sum::<u32>())
        .sum();
    if inflow > 0 {
        flag(
            Constraint::NoInflowToStaging,
            format!("{inflow} xApps sent to the staging server"),
        );
    }

    for k in 0..classes {
        let placed: u32 = (0..servers).map(|t| x[k][staging][t]).sum();
        let staged = problem.n0(k, staging);
        if placed != staged {
            flag(
                Constraint::StagingDrained,
                format!(
                    "class {}: {placed} of {staged} staged xApps placed on physical servers",
                    state.classes[k].id
                ),
            );
        }
    }

    let big_m = problem.big_m as u64;
    for s in 0..servers {
        let sent: u64 = (0..classes)
            .map(|k| (0..=servers).filter(|&t| t != s).map(|t| x[k][s][t] as u64).sum::<u64>())
            .sum();
        let was_active = state.initial_active[s] as u64;
        if sent > big_m * was_active {
            flag(
                Constraint::SourceActive,
                format!("{} sends {sent} xApps but was inactive", name(s)),
            );
        }
        let received: u64 = (0..classes)
            .map(|k| (0..=servers).map(|t| x[k][t][s] as u64).sum::<u64>())
            .sum();
        if received > big_m * mu[s] as u64 {
            flag(
                Constraint::DestinationActive,
                format!("{} hosts {received} xApps but is off", name(s)),
            );
        }
        if state.servers[s].optional && mu[s] && received == 0 {
            flag(
                Constraint::ActiveHostsLoad,
                format!("optional server {} is on but hosts nothing", name(s)),
            );
        }
        if !state.servers[s].optional && !mu[s] {
            flag(
                Constraint::MandatoryActive,
                format!("mandatory server {} is off", name(s)),
            );
        }
    }

    let evals = model::evaluate_servers(ctx, state, x, mu)?;
    for (s, ev) in evals.iter().enumerate() {
        let spec = &state.servers[s];
        for r in Resource::ALL {
            let used = ev.resources[r.index()];
            let cap = if mu[s] { spec.capacity(r) } else { 0.0 };
            if exceeds(used, cap) {
                flag(
                    Constraint::Capacity,
                    format!("{} uses {used:.6} {r} of {cap}", name(s)),
                );
            }
        }
        if problem.has_constraint(Constraint::SmDowntime)
            && exceeds(ev.downtime, problem.params.max_sm_downtime)
        {
            flag(
                Constraint::SmDowntime,
                format!(
                    "{} accumulates {:.6} s of migration downtime, limit {} s",
                    name(s),
                    ev.downtime,
                    problem.params.max_sm_downtime
                ),
            );
        }
        if ev.window_s > problem.params.slot_length {
            flag(
                Constraint::SlotWindow,
                format!(
                    "{}: migration window {:.6} s exceeds slot length {} s",
                    name(s),
                    ev.window_s,
                    problem.params.slot_length
                ),
            );
        }
    }

    if let Some(sdl) = ctx.sdl {
        if sdl.defrag_downtime >= problem.params.max_defrag_downtime {
            flag(
                Constraint::SdlDefrag,
                format!(
                    "defrag downtime {:.6} s, limit {} s",
                    sdl.defrag_downtime, problem.params.max_defrag_downtime
                ),
            );
        }
        if sdl.active_time <= 0.0 {
            flag(
                Constraint::SdlActiveTime,
                format!("active time {:.6} s is not positive", sdl.active_time),
            );
        }
    }

    out.sort_by_key(|v| v.constraint);
    Ok(Verdict {
        valid: out.is_empty(),
        violations: out,
    })
}
