//! Grid sweeps over strategy, state size, maintenance period and xApp count.
//!
//! Every grid point starts from the baseline placement of its xApps, so the
//! solver's job is pure consolidation.

use serde::{Deserialize, Serialize};

use super::{balanced_placement, run_timeslot, SlotConfig};
use crate::calibration::CalibrationSet;
use crate::error::{Error, Result};
use crate::model::types::{ClusterState, ScenarioParams, ServerSpec, Strategy, XAppClass, MB};
use crate::model::ModelContext;
use crate::solver::build_problem;

fn default_share() -> f64 {
    0.75
}

fn default_servers() -> Vec<ServerSpec> {
    (0..4)
        .map(|i| ServerSpec::testbed(format!("server-{i}"), i > 0))
        .collect()
}

/// Grid of scenarios. The class mix gives `dominant_share` of the xApps to
/// the dominant class and splits the rest evenly over the other classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dominant_class: String,
    #[serde(default = "default_share")]
    pub dominant_share: f64,
    /// Total xApp counts to evaluate.
    pub counts: Vec<u32>,
    /// State sizes in megabytes.
    pub rho_mb: Vec<f64>,
    /// Maintenance periods in seconds.
    pub nu_s: Vec<f64>,
    pub strategies: Vec<Strategy>,
    #[serde(default = "XAppClass::reference_classes")]
    pub classes: Vec<XAppClass>,
    #[serde(default = "default_servers")]
    pub servers: Vec<ServerSpec>,
}

impl SweepSpec {
    pub fn new(dominant_class: impl Into<String>, counts: Vec<u32>) -> Self {
        Self {
            dominant_class: dominant_class.into(),
            dominant_share: default_share(),
            counts,
            rho_mb: vec![1.0],
            nu_s: vec![1.0],
            strategies: Strategy::ALL.to_vec(),
            classes: XAppClass::reference_classes(),
            servers: default_servers(),
        }
    }

    fn dominant_index(&self) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c.id == self.dominant_class)
            .ok_or_else(|| Error::InvalidParams(format!("unknown dominant class `{}`", self.dominant_class)))
    }

    pub fn validate(&self) -> Result<()> {
        self.dominant_index()?;
        if !(self.dominant_share > 0.0 && self.dominant_share <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "dominant_share must be in (0, 1], got {}",
                self.dominant_share
            )));
        }
        for &rho in &self.rho_mb {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidParams(format!("rho_mb must be > 0, got {rho}")));
            }
        }
        for &nu in &self.nu_s {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::InvalidParams(format!("nu_s must be > 0, got {nu}")));
            }
        }
        let probe = ClusterState::new(self.classes.clone(), self.servers.clone());
        probe.validate()
    }

    /// Grid points in output order: strategy, then state size, then
    /// maintenance period.
    fn configs(&self, template: &ScenarioParams) -> Vec<(ScenarioParams, f64, f64)> {
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &rho in &self.rho_mb {
                for &nu in &self.nu_s {
                    let params = ScenarioParams {
                        strategy,
                        state_size: (rho * MB as f64).round() as u64,
                        maintenance_period: nu,
                        ..template.clone()
                    };
                    out.push((params, rho, nu));
                }
            }
        }
        out
    }

    fn state_for(&self, mix: &[u32]) -> ClusterState {
        let mut st = ClusterState::new(self.classes.clone(), self.servers.clone());
        st.pending_deploys = mix.to_vec();
        st
    }
}

/// Splits `total` over the classes with the largest-remainder rule. Ties on
/// the remainder go to the lower class index.
pub fn class_mix(classes: usize, dominant: usize, share: f64, total: u32) -> Vec<u32> {
    let share = if classes <= 1 { 1.0 } else { share };
    let quota: Vec<f64> = (0..classes)
        .map(|k| {
            let w = if k == dominant { share } else { (1.0 - share) / (classes - 1) as f64 };
            w * total as f64
        })
        .collect();
    let mut mix: Vec<u32> = quota.iter().map(|q| (q + 1e-9).floor() as u32).collect();
    let mut left = total - mix.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quota[a] - mix[a] as f64, quota[b] - mix[b] as f64);
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for k in order {
        if left == 0 {
            break;
        }
        mix[k] += 1;
        left -= 1;
    }
    mix
}

/// One CSV row of a sweep. `feasible` is `None` when the calibration does
/// not cover the grid point; `diagnostic` then says which key is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub strategy: Strategy,
    pub class: String,
    pub rho_mb: f64,
    pub nu_s: f64,
    pub n_total: u32,
    pub feasible: Option<bool>,
    pub energy_gain: Option<f64>,
    pub activation_ratio: Option<f64>,
    pub mip_gap: Option<f64>,
    pub runtime_s: Option<f64>,
    pub diagnostic: Option<String>,
}

impl SweepRow {
    fn blank(spec: &SweepSpec, params: &ScenarioParams, rho: f64, nu: f64, n: u32) -> Self {
        Self {
            strategy: params.strategy,
            class: spec.dominant_class.clone(),
            rho_mb: rho,
            nu_s: nu,
            n_total: n,
            feasible: None,
            energy_gain: None,
            activation_ratio: None,
            mip_gap: None,
            runtime_s: None,
            diagnostic: None,
        }
    }
}

/// Whether `mix` can be hosted at all: the baseline placement fits, the
/// backend defrag stays within budget (SDL), and a single server can send
/// all of its xApps within the downtime budget (stateful strategies).
fn point_feasible(spec: &SweepSpec, mix: &[u32], params: &ScenarioParams, cal: &CalibrationSet) -> Result<(bool, String)> {
    let ctx = ModelContext::new(&spec.classes, spec.servers.len(), mix, params, cal)?;
    if let Some(sdl) = ctx.sdl {
        if !sdl.feasible {
            return Ok((false, format!("defrag downtime {:.6} s over budget", sdl.defrag_downtime)));
        }
    } else {
        let downtime = ctx.server_downtime(mix);
        if downtime > params.max_sm_downtime * (1.0 + 1e-9) {
            return Ok((false, format!("single-server downtime {downtime:.6} s over budget")));
        }
    }
    let problem = build_problem(&spec.state_for(mix), params, cal)?;
    Ok(match balanced_placement(&problem) {
        Ok(_) => (true, String::new()),
        Err(why) => (false, why),
    })
}

/// Evaluates feasibility at every grid point.
pub fn feasibility_sweep(spec: &SweepSpec, template: &ScenarioParams, cal: &CalibrationSet) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let dominant = spec.dominant_index()?;
    let mut rows = Vec::new();
    for (params, rho, nu) in spec.configs(template) {
        for &n in &spec.counts {
            let mut row = SweepRow::blank(spec, &params, rho, nu, n);
            let mix = class_mix(spec.classes.len(), dominant, spec.dominant_share, n);
            match point_feasible(spec, &mix, &params, cal) {
                Ok((ok, why)) => {
                    row.feasible = Some(ok);
                    row.diagnostic = (!why.is_empty()).then_some(why);
                }
                Err(e @ Error::CalibrationLookup { .. }) => row.diagnostic = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Largest feasible count of one grid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityBound {
    pub strategy: Strategy,
    pub class: String,
    pub rho_mb: f64,
    pub nu_s: f64,
    /// `None` when no evaluated count was feasible or the calibration did not
    /// cover the configuration.
    pub max_n: Option<u32>,
}

/// Collapses feasibility rows to the largest feasible count per
/// configuration, in first-seen order.
pub fn max_feasible(rows: &[SweepRow]) -> Vec<FeasibilityBound> {
    let mut out: Vec<FeasibilityBound> = Vec::new();
    for row in rows {
        let idx = out.iter().position(|b| {
            b.strategy == row.strategy && b.class == row.class && b.rho_mb == row.rho_mb && b.nu_s == row.nu_s
        });
        let idx = idx.unwrap_or_else(|| {
            out.push(FeasibilityBound {
                strategy: row.strategy,
                class: row.class.clone(),
                rho_mb: row.rho_mb,
                nu_s: row.nu_s,
                max_n: None,
            });
            out.len() - 1
        });
        if row.feasible == Some(true) {
            let b = &mut out[idx];
            b.max_n = Some(b.max_n.map_or(row.n_total, |m| m.max(row.n_total)));
        }
    }
    out
}

/// Solves one slot per grid point and reports the gain over the baseline.
pub fn energy_sweep(
    spec: &SweepSpec,
    template: &ScenarioParams,
    cal: &CalibrationSet,
    config: &SlotConfig,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let dominant = spec.dominant_index()?;
    let mut rows = Vec::new();
    for (params, rho, nu) in spec.configs(template) {
        for &n in &spec.counts {
            let mut row = SweepRow::blank(spec, &params, rho, nu, n);
            let mix = class_mix(spec.classes.len(), dominant, spec.dominant_share, n);
            match energy_point(spec, &mix, &params, cal, config, &mut row) {
                Ok(()) => {}
                Err(e @ Error::CalibrationLookup { .. }) => row.diagnostic = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn energy_point(
    spec: &SweepSpec,
    mix: &[u32],
    params: &ScenarioParams,
    cal: &CalibrationSet,
    config: &SlotConfig,
    row: &mut SweepRow,
) -> Result<()> {
    let staged = build_problem(&spec.state_for(mix), params, cal)?;
    let Ok((x, _)) = balanced_placement(&staged) else {
        row.feasible = Some(false);
        row.diagnostic = Some("baseline placement does not fit".into());
        return Ok(());
    };
    let mut initial = ClusterState::new(spec.classes.clone(), spec.servers.clone());
    for (k, xk) in x.iter().enumerate() {
        for s in 0..spec.servers.len() {
            initial.initial_counts[k][s] = xk.iter().map(|r| r[s]).sum();
        }
    }
    let res = run_timeslot(&initial, params, cal, config)?;
    row.feasible = Some(res.feasible());
    row.energy_gain = res.energy_gain;
    row.activation_ratio = res.activation_ratio;
    row.mip_gap = res.report.mip_gap;
    row.runtime_s = Some(res.report.runtime_s);
    row.diagnostic = res.report.infeasibility.or(res.baseline_issue);
    Ok(())
}
