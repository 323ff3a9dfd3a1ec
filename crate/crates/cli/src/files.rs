//! Scenario and sweep file formats.
//!
//! Both are JSON. Field names carry their units (`_s` seconds, `_mb`
//! megabytes, `_bytes` bytes); capacities are in cores and gigabytes.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sal_core::orchestrator::{SlotConfig, SweepSpec, UndeployPolicy};
use sal_core::{ClusterState, ScenarioParams, ServerSpec, SolveLimits, SolverChoice, Strategy, XAppClass, MB};

/// Reads and parses a JSON file. Errors name the offending field path and
/// the line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_json(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            anyhow::anyhow!("{inner}")
        } else {
            anyhow::anyhow!("field `{path}`: {inner}")
        }
    })
}

/// An xApp class: a reference id (`"A"` to `"D"`) or a full definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassEntry {
    Reference(String),
    Custom(XAppClass),
}

impl ClassEntry {
    fn resolve(&self) -> Result<XAppClass> {
        match self {
            ClassEntry::Reference(id) => {
                XAppClass::reference(id).with_context(|| format!("unknown reference class `{id}`"))
            }
            ClassEntry::Custom(c) => {
                c.validate()?;
                Ok(c.clone())
            }
        }
    }
}

/// A physical server. Missing capacities default to the testbed node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerEntry {
    pub id: String,
    #[serde(default)]
    pub optional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_cap: Option<f64>,
}

impl ServerEntry {
    fn resolve(&self) -> ServerSpec {
        let base = ServerSpec::testbed(self.id.clone(), self.optional);
        ServerSpec {
            cpu_cap: self.cpu_cap.unwrap_or(base.cpu_cap),
            mem_cap: self.mem_cap.unwrap_or(base.mem_cap),
            disk_cap: self.disk_cap.unwrap_or(base.disk_cap),
            ..base
        }
    }
}

/// Slot parameters; absent fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_size_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_size_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maintenance_period_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_length_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sm_downtime_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_defrag_downtime_s: Option<f64>,
}

impl ParamsEntry {
    fn resolve(&self) -> Result<ScenarioParams> {
        let d = ScenarioParams::default();
        let state_size = match (self.state_size_mb, self.state_size_bytes) {
            (Some(_), Some(_)) => bail!("params: set only one of `state_size_mb` and `state_size_bytes`"),
            (Some(mb), None) => {
                if !(mb > 0.0 && mb.is_finite()) {
                    bail!("params.state_size_mb must be > 0, got {mb}");
                }
                (mb * MB as f64).round() as u64
            }
            (None, Some(bytes)) => bytes,
            (None, None) => d.state_size,
        };
        let params = ScenarioParams {
            strategy: self.strategy.unwrap_or(d.strategy),
            state_size,
            maintenance_period: self.maintenance_period_s.unwrap_or(d.maintenance_period),
            slot_length: self.slot_length_s.unwrap_or(d.slot_length),
            max_sm_downtime: self.max_sm_downtime_s.unwrap_or(d.max_sm_downtime),
            max_defrag_downtime: self.max_defrag_downtime_s.unwrap_or(d.max_defrag_downtime),
        };
        params.validate().context("params")?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<u64>,
}

impl LimitsEntry {
    fn resolve(&self) -> Result<SolveLimits> {
        let d = SolveLimits::default();
        let limits = SolveLimits {
            time_limit: self.time_limit_s.unwrap_or(d.time_limit),
            gap_target: self.gap.unwrap_or(d.gap_target),
            node_limit: self.node_limit.or(d.node_limit),
            ..d
        };
        check_limits(&limits)?;
        Ok(limits)
    }
}

pub fn check_limits(limits: &SolveLimits) -> Result<()> {
    if !(limits.time_limit >= 0.0) {
        bail!("time limit must be >= 0 s, got {}", limits.time_limit);
    }
    if !(limits.gap_target >= 0.0 && limits.gap_target.is_finite()) {
        bail!("gap must be a finite fraction >= 0, got {}", limits.gap_target);
    }
    Ok(())
}

/// One planning slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub classes: Vec<ClassEntry>,
    pub servers: Vec<ServerEntry>,
    /// `placement[k][s]`: xApps of class `k` running on server `s`. All zero
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Vec<Vec<u32>>>,
    /// Servers on at slot start. All on when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<bool>>,
    /// xApps of each class to deploy this slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deploy: Option<Vec<u32>>,
    /// xApps of each class to remove this slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undeploy: Option<Vec<u32>>,
    #[serde(default)]
    pub params: ParamsEntry,
    #[serde(default)]
    pub limits: LimitsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverChoice>,
    #[serde(default)]
    pub undeploy_policy: UndeployPolicy,
}

/// A parsed and checked scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: ClusterState,
    pub params: ScenarioParams,
    pub config: SlotConfig,
}

fn per_class(field: &str, v: &Option<Vec<u32>>, classes: usize) -> Result<Vec<u32>> {
    match v {
        None => Ok(vec![0; classes]),
        Some(v) if v.len() == classes => Ok(v.clone()),
        Some(v) => bail!("{field}: expected {classes} entries (one per class), got {}", v.len()),
    }
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<Scenario> {
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| c.resolve().with_context(|| format!("classes[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let servers: Vec<ServerSpec> = self.servers.iter().map(ServerEntry::resolve).collect();
        let (k, s) = (classes.len(), servers.len());
        let mut state = ClusterState::new(classes, servers);
        if let Some(p) = &self.placement {
            if p.len() != k {
                bail!("placement: expected {k} rows (one per class), got {}", p.len());
            }
            for (i, row) in p.iter().enumerate() {
                if row.len() != s {
                    bail!("placement[{i}]: expected {s} entries (one per server), got {}", row.len());
                }
            }
            state.initial_counts = p.clone();
        }
        if let Some(a) = &self.active {
            if a.len() != s {
                bail!("active: expected {s} entries (one per server), got {}", a.len());
            }
            state.initial_active = a.clone();
        }
        state.pending_deploys = per_class("deploy", &self.deploy, k)?;
        state.pending_undeploys = per_class("undeploy", &self.undeploy, k)?;
        state.validate()?;
        Ok(Scenario {
            state,
            params: self.params.resolve()?,
            config: SlotConfig {
                solver: self.solver.unwrap_or_default(),
                limits: self.limits.resolve().context("limits")?,
                undeploy_policy: self.undeploy_policy,
            },
        })
    }
}

/// Inclusive range of xApp counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub start: u32,
    pub end: u32,
    #[serde(default = "one")]
    pub step: u32,
}

fn one() -> u32 {
    1
}

impl CountRange {
    fn values(&self) -> Result<Vec<u32>> {
        if self.step == 0 {
            bail!("count_range.step must be > 0");
        }
        Ok((self.start..=self.end).step_by(self.step as usize).collect())
    }
}

/// A grid of scenarios for the feasibility and energy sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub dominant_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_range: Option<CountRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mb: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Strategy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub servers: Option<Vec<ServerEntry>>,
    /// Template for the parameters the grid does not vary.
    #[serde(default)]
    pub params: ParamsEntry,
    #[serde(default)]
    pub limits: LimitsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverChoice>,
    #[serde(default)]
    pub undeploy_policy: UndeployPolicy,
}

/// A parsed and checked sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub spec: SweepSpec,
    pub template: ScenarioParams,
    pub config: SlotConfig,
}

impl SweepFile {
    pub fn resolve(&self) -> Result<Sweep> {
        let counts = match (&self.counts, &self.count_range) {
            (Some(_), Some(_)) => bail!("set only one of `counts` and `count_range`"),
            (Some(c), None) => c.clone(),
            (None, Some(r)) => r.values()?,
            (None, None) => bail!("one of `counts` and `count_range` is required"),
        };
        let mut spec = SweepSpec::new(self.dominant_class.clone(), counts);
        if let Some(v) = self.dominant_share {
            spec.dominant_share = v;
        }
        if let Some(v) = &self.rho_mb {
            spec.rho_mb = v.clone();
        }
        if let Some(v) = &self.nu_s {
            spec.nu_s = v.clone();
        }
        if let Some(v) = &self.strategies {
            spec.strategies = v.clone();
        }
        if let Some(v) = &self.classes {
            spec.classes = v
                .iter()
                .enumerate()
                .map(|(i, c)| c.resolve().with_context(|| format!("classes[{i}]")))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = &self.servers {
            spec.servers = v.iter().map(ServerEntry::resolve).collect();
        }
        spec.validate()?;
        Ok(Sweep {
            spec,
            template: self.params.resolve()?,
            config: SlotConfig {
                solver: self.solver.unwrap_or_default(),
                limits: self.limits.resolve().context("limits")?,
                undeploy_policy: self.undeploy_policy,
            },
        })
    }
}
