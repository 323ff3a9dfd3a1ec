//! Domain types shared by every module. All quantities are SI: bytes,
//! seconds, joules, watts. Resource capacities use cores and gigabytes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One megabyte, as used for state sizes.
pub const MB: u64 = 1_000_000;

/// Lossless migration strategy used for a planning slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// State kept in the shared data layer backend; migration is stateless.
    #[serde(rename = "sdl")]
    Sdl,
    /// Stateful migration minimizing resource usage (cold checkpoint/restore).
    #[serde(rename = "sm-mr")]
    SmMr,
    /// Stateful migration minimizing downtime (iterative pre-copy).
    #[serde(rename = "sm-md")]
    SmMd,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Sdl, Strategy::SmMr, Strategy::SmMd];

    pub fn is_stateful(self) -> bool {
        !matches!(self, Strategy::Sdl)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Sdl => "sdl",
            Strategy::SmMr => "sm-mr",
            Strategy::SmMd => "sm-md",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sdl" => Ok(Strategy::Sdl),
            "sm-mr" => Ok(Strategy::SmMr),
            "sm-md" => Ok(Strategy::SmMd),
            other => Err(Error::InvalidParams(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Server resource kinds subject to capacity limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Resource {
    #[serde(rename = "CPU")]
    Cpu,
    #[serde(rename = "MEM")]
    Mem,
    #[serde(rename = "DISK")]
    Disk,
}

impl Resource {
    pub const ALL: [Resource; 3] = [Resource::Cpu, Resource::Mem, Resource::Disk];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resource::Cpu => "CPU",
            Resource::Mem => "MEM",
            Resource::Disk => "DISK",
        })
    }
}

/// Traffic class of an xApp: size and period of the RAN indication messages
/// it consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XAppClass {
    pub id: String,
    /// Message size in bytes.
    pub msg_size: f64,
    /// Message period in seconds.
    pub msg_period: f64,
}

impl XAppClass {
    pub fn new(id: impl Into<String>, msg_size: f64, msg_period: f64) -> Result<Self> {
        let class = Self {
            id: id.into(),
            msg_size,
            msg_period,
        };
        class.validate()?;
        Ok(class)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidParams("class id must not be empty".into()));
        }
        if !(self.msg_size > 0.0 && self.msg_size.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "class {}: msg_size must be > 0",
                self.id
            )));
        }
        if !(self.msg_period > 0.0 && self.msg_period.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "class {}: msg_period must be > 0",
                self.id
            )));
        }
        Ok(())
    }

    /// The four reference classes A-D.
    pub fn reference_classes() -> Vec<XAppClass> {
        vec![
            XAppClass { id: "A".into(), msg_size: 100.0, msg_period: 1.0 },
            XAppClass { id: "B".into(), msg_size: 100.0, msg_period: 0.1 },
            XAppClass { id: "C".into(), msg_size: 100_000.0, msg_period: 1.0 },
            XAppClass { id: "D".into(), msg_size: 100_000.0, msg_period: 0.1 },
        ]
    }

    pub fn reference(id: &str) -> Option<XAppClass> {
        Self::reference_classes().into_iter().find(|c| c.id == id)
    }
}

/// Timing parameters of a planning slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// xApp state size in bytes.
    pub state_size: u64,
    /// Backend maintenance (compaction + defrag) period in seconds.
    pub maintenance_period: f64,
    /// Slot length in seconds.
    pub slot_length: f64,
    /// Per-server bound on the summed stateful-migration downtime, seconds.
    pub max_sm_downtime: f64,
    /// Bound on the backend defrag downtime, seconds.
    pub max_defrag_downtime: f64,
    pub strategy: Strategy,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")))
            }
        };
        positive(self.slot_length, "slot_length")?;
        positive(self.maintenance_period, "maintenance_period")?;
        positive(self.max_defrag_downtime, "max_defrag_downtime")?;
        if !(self.max_sm_downtime >= 0.0) {
            return Err(Error::InvalidParams(
                "max_sm_downtime must be >= 0".into(),
            ));
        }
        if self.state_size == 0 {
            return Err(Error::InvalidParams("state_size must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for ScenarioParams {
    /// One-hour slots, 1 MB state, 1 s maintenance period, 300 s migration
    /// downtime budget, 1 s defrag budget.
    fn default() -> Self {
        Self {
            state_size: MB,
            maintenance_period: 1.0,
            slot_length: 3600.0,
            max_sm_downtime: 300.0,
            max_defrag_downtime: 1.0,
            strategy: Strategy::SmMr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSpec {
    pub id: String,
    /// `true` when the server may be turned off.
    pub optional: bool,
    /// Virtual cores.
    pub cpu_cap: f64,
    /// Gigabytes.
    pub mem_cap: f64,
    /// Gigabytes.
    pub disk_cap: f64,
}

impl ServerSpec {
    /// Testbed-sized node: 128 cores, 125 GB memory, 250 GB disk.
    pub fn testbed(id: impl Into<String>, optional: bool) -> Self {
        Self {
            id: id.into(),
            optional,
            cpu_cap: 128.0,
            mem_cap: 125.0,
            disk_cap: 250.0,
        }
    }

    pub fn capacity(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Cpu => self.cpu_cap,
            Resource::Mem => self.mem_cap,
            Resource::Disk => self.disk_cap,
        }
    }
}

/// Cluster at the start of a slot. The virtual staging server is not stored;
/// solvers synthesize it from `pending_deploys`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    pub classes: Vec<XAppClass>,
    pub servers: Vec<ServerSpec>,
    /// `initial_counts[k][s]`: xApps of class `k` running on server `s`.
    pub initial_counts: Vec<Vec<u32>>,
    pub initial_active: Vec<bool>,
    pub pending_deploys: Vec<u32>,
    pub pending_undeploys: Vec<u32>,
}

impl ClusterState {
    /// Empty cluster with every server active.
    pub fn new(classes: Vec<XAppClass>, servers: Vec<ServerSpec>) -> Self {
        let k = classes.len();
        let s = servers.len();
        Self {
            classes,
            initial_active: vec![true; s],
            servers,
            initial_counts: vec![vec![0; s]; k],
            pending_deploys: vec![0; k],
            pending_undeploys: vec![0; k],
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    pub fn class_index(&self, id: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.id == id)
    }

    /// xApps of class `k` deployed on physical servers.
    pub fn deployed(&self, k: usize) -> u32 {
        self.initial_counts[k].iter().sum()
    }

    /// Per-class totals once pending deployments and undeployments apply.
    pub fn final_totals(&self) -> Vec<u32> {
        (0..self.class_count())
            .map(|k| {
                let deployed = self.deployed(k);
                deployed - self.pending_undeploys[k].min(deployed) + self.pending_deploys[k]
            })
            .collect()
    }

    pub fn hosted_on(&self, s: usize) -> u32 {
        self.initial_counts.iter().map(|row| row[s]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.classes.len();
        let s = self.servers.len();
        if s == 0 {
            return Err(Error::InvalidState("cluster has no servers".into()));
        }
        for (i, c) in self.classes.iter().enumerate() {
            c.validate()?;
            if self.classes[..i].iter().any(|o| o.id == c.id) {
                return Err(Error::InvalidState(format!("duplicate class id `{}`", c.id)));
            }
        }
        for (i, srv) in self.servers.iter().enumerate() {
            if self.servers[..i].iter().any(|o| o.id == srv.id) {
                return Err(Error::InvalidState(format!("duplicate server id `{}`", srv.id)));
            }
            for r in Resource::ALL {
                let cap = srv.capacity(r);
                if !(cap > 0.0 && cap.is_finite()) {
                    return Err(Error::InvalidState(format!(
                        "server {}: {r} capacity must be > 0",
                        srv.id
                    )));
                }
            }
        }
        if self.servers.iter().all(|srv| srv.optional) {
            return Err(Error::InvalidState(
                "at least one server must be mandatory (optional = false)".into(),
            ));
        }
        if self.initial_counts.len() != k
            || self.initial_counts.iter().any(|row| row.len() != s)
        {
            return Err(Error::InvalidState(format!(
                "initial_counts must be {k} x {s}"
            )));
        }
        if self.initial_active.len() != s {
            return Err(Error::InvalidState(format!("initial_active must have {s} entries")));
        }
        if self.pending_deploys.len() != k || self.pending_undeploys.len() != k {
            return Err(Error::InvalidState(format!(
                "pending deploy/undeploy vectors must have {k} entries"
            )));
        }
        for (si, active) in self.initial_active.iter().enumerate() {
            if !active && self.hosted_on(si) > 0 {
                return Err(Error::InvalidState(format!(
                    "server {} is inactive but hosts xApps",
                    self.servers[si].id
                )));
            }
        }
        for ki in 0..k {
            if self.deployed(ki) < self.pending_undeploys[ki] {
                return Err(Error::InvalidState(format!(
                    "class {}: {} undeployments requested but only {} deployed",
                    self.classes[ki].id,
                    self.pending_undeploys[ki],
                    self.deployed(ki)
                )));
            }
        }
        Ok(())
    }
}

/// Timing figures of a migration plan.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KpiBundle {
    /// `downtime[k][s]`: migration downtime of class `k` leaving server `s`.
    pub downtime: Vec<Vec<f64>>,
    /// `migration_duration[k][s]`: total migration time of class `k` leaving `s`.
    pub migration_duration: Vec<Vec<f64>>,
    /// `instantiation_time[k][s]`: time to start new class-`k` xApps on `s`.
    pub instantiation_time: Vec<Vec<f64>>,
    /// Backend defrag downtime (zero unless the strategy is SDL).
    pub defrag_downtime: f64,
    /// Time per maintenance period during which the backend is available.
    pub active_time: f64,
}
