//! Coefficients resolved once per scenario, and the per-server evaluation
//! that every energy and resource figure goes through.

use serde::{Deserialize, Serialize};

use super::kpi::SdlFeasibility;
use super::types::{ClusterState, Resource, ScenarioParams, Strategy, XAppClass};
use crate::calibration::{Affine, CalibrationSet, Metric};
use crate::error::{Error, Result};

/// Everything the models need for one (classes, cluster size, parameters,
/// calibration) combination, with every lookup already performed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContext {
    pub strategy: Strategy,
    pub slot_length: f64,
    pub max_sm_downtime: f64,
    /// Number of physical servers.
    pub server_count: usize,
    /// Cluster-wide xApp count per class used by the backend terms.
    pub totals: Vec<u32>,
    pub downtime: Affine,
    pub duration: Affine,
    pub instantiation: Affine,
    /// `load[k][metric]`: per-xApp consumption.
    pub load: Vec<[f64; 4]>,
    /// Idle consumption of an active server, by metric.
    pub idle: [f64; 4],
    /// Stateful migration engine consumption at a source server, by metric.
    /// Zero for SDL.
    pub sm_overhead: [f64; 4],
    /// Backend share carried by each active server, by metric. Zero for
    /// stateful strategies.
    pub sdl_share: [f64; 4],
    /// Backend maintenance outcome; `None` for stateful strategies.
    pub sdl: Option<SdlFeasibility>,
}

/// Per-class movement at one physical server.
#[derive(Debug, Clone, Copy)]
pub struct ServerSlice<'a> {
    /// xApps hosted at slot start.
    pub initial: &'a [u32],
    /// xApps leaving for another server.
    pub outgoing: &'a [u32],
    /// New xApps started here.
    pub instantiated: &'a [u32],
    /// xApps hosted at slot end.
    pub hosted: &'a [u32],
    pub active: bool,
}

/// Energy of one server over a slot, in joules.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ServerEnergy {
    /// Migration engine (stateful) or backend share (SDL).
    pub strategy: f64,
    /// Consumption during the migration window, at the initial load.
    pub window: f64,
    /// Consumption for the rest of the slot, at the final load.
    pub steady: f64,
    pub total: f64,
    /// Length of the migration window, seconds.
    pub window_s: f64,
}

impl ModelContext {
    pub fn new(
        classes: &[XAppClass],
        server_count: usize,
        totals: &[u32],
        params: &ScenarioParams,
        cal: &CalibrationSet,
    ) -> Result<Self> {
        params.validate()?;
        if server_count == 0 {
            return Err(Error::InvalidState("cluster has no servers".into()));
        }
        super::kpi::check_len(classes, totals)?;
        let strategy = params.strategy;
        let kpi = cal.kpi(strategy, params.state_size)?;
        let instantiation = cal.instantiation()?;

        let mut load = Vec::with_capacity(classes.len());
        for c in classes {
            let mut row = [0.0; 4];
            for m in Metric::ALL {
                row[m.index()] = cal.xapp_load(&c.id, m)?;
            }
            load.push(row);
        }
        let mut idle = [0.0; 4];
        for m in Metric::ALL {
            idle[m.index()] = cal.server_idle(m)?;
        }

        let mut sm_overhead = [0.0; 4];
        let mut sdl_share = [0.0; 4];
        let mut sdl = None;
        if strategy.is_stateful() {
            for m in Metric::ALL {
                sm_overhead[m.index()] = cal.sm_overhead(strategy, m)?;
            }
        } else {
            let (rho, nu) = (params.state_size, params.maintenance_period);
            for m in Metric::ALL {
                let mut sum = 0.0;
                for (c, &n) in classes.iter().zip(totals) {
                    sum += cal.sdl_linear(&c.id, m, rho, nu)?.eval(n as f64);
                }
                sdl_share[m.index()] = sum / server_count as f64;
            }
            let t_df = super::kpi::defrag_downtime(classes, totals, params, cal)?;
            sdl = Some(SdlFeasibility::evaluate(t_df, params));
        }

        Ok(Self {
            strategy,
            slot_length: params.slot_length,
            max_sm_downtime: params.max_sm_downtime,
            server_count,
            totals: totals.to_vec(),
            downtime: if strategy.is_stateful() { kpi.downtime } else { Affine::default() },
            duration: kpi.duration,
            instantiation,
            load,
            idle,
            sm_overhead,
            sdl_share,
            sdl,
        })
    }

    /// Context for a cluster once its pending deployments and undeployments
    /// have been applied.
    pub fn for_state(state: &ClusterState, params: &ScenarioParams, cal: &CalibrationSet) -> Result<Self> {
        Self::new(
            &state.classes,
            state.server_count(),
            &state.final_totals(),
            params,
            cal,
        )
    }

    pub fn class_count(&self) -> usize {
        self.load.len()
    }

    /// Summed downtime of the outgoing migrations of one server.
    pub fn server_downtime(&self, outgoing: &[u32]) -> f64 {
        outgoing.iter().map(|&n| self.downtime.eval_count(n)).sum()
    }

    /// Migration window length: migration plus instantiation times.
    pub fn window(&self, outgoing: &[u32], instantiated: &[u32]) -> f64 {
        let m: f64 = outgoing.iter().map(|&n| self.duration.eval_count(n)).sum();
        let i: f64 = instantiated
            .iter()
            .map(|&n| self.instantiation.eval_count(n))
            .sum();
        m + i
    }

    /// Per-xApp-weighted sum of `counts` for `metric`.
    pub fn load_of(&self, counts: &[u32], metric: Metric) -> f64 {
        self.load
            .iter()
            .zip(counts)
            .map(|(p, &n)| p[metric.index()] * n as f64)
            .sum()
    }

    /// Resource overhead of the migration strategy on one server. The backend
    /// share applies to active servers; the stateful engine runs on active
    /// servers that send migrations.
    pub fn overhead(&self, metric: Metric, active: bool, participates: bool) -> f64 {
        if !active {
            return 0.0;
        }
        if self.strategy.is_stateful() {
            if participates {
                self.sm_overhead[metric.index()]
            } else {
                0.0
            }
        } else {
            self.sdl_share[metric.index()]
        }
    }

    /// Resource usage `[CPU, MEM, DISK]` at slot end, floored at zero.
    pub fn resources(&self, hosted: &[u32], active: bool, participates: bool) -> [f64; 3] {
        let mut out = [0.0; 3];
        for r in Resource::ALL {
            let m = Metric::from(r);
            let idle = if active { self.idle[m.index()] } else { 0.0 };
            let v = idle + self.load_of(hosted, m) + self.overhead(m, active, participates);
            out[r.index()] = v.max(0.0);
        }
        out
    }

    /// Stateful migration energy `b_E * Σ T_M`.
    pub fn sm_migration_energy(&self, total_duration: f64) -> f64 {
        if self.strategy.is_stateful() {
            self.sm_overhead[Metric::Energy.index()] * total_duration
        } else {
            0.0
        }
    }

    /// Backend energy carried by one active server over the slot.
    pub fn sdl_energy_per_server(&self) -> f64 {
        self.slot_length * self.sdl_share[Metric::Energy.index()]
    }

    pub fn server_energy(&self, slice: &ServerSlice<'_>) -> Result<ServerEnergy> {
        let e = Metric::Energy;
        let durations: f64 = slice
            .outgoing
            .iter()
            .map(|&n| self.duration.eval_count(n))
            .sum();
        let window_s = self.window(slice.outgoing, slice.instantiated);
        if window_s > self.slot_length {
            return Err(Error::ModelDomain(format!(
                "migration window {window_s} s exceeds slot length {} s",
                self.slot_length
            )));
        }
        let strategy = if self.strategy.is_stateful() {
            self.sm_migration_energy(durations)
        } else if slice.active {
            self.sdl_energy_per_server()
        } else {
            0.0
        };
        let q = self.idle[e.index()];
        let window = (window_s * (q + self.load_of(slice.initial, e))).max(0.0);
        let idle = if slice.active { q } else { 0.0 };
        let steady = ((self.slot_length - window_s) * (idle + self.load_of(slice.hosted, e))).max(0.0);
        Ok(ServerEnergy {
            strategy,
            window,
            steady,
            total: strategy + window + steady,
            window_s,
        })
    }
}
