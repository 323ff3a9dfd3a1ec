//! JSON calibration documents.
//!
//! Values use the units of the reference tables: seconds for timing
//! coefficients, milliseconds for defrag slopes, watts, cores and gigabytes
//! elsewhere. State sizes are given in MB and maintenance periods in seconds.
//! Omitted key fields are wildcards.

use serde::{Deserialize, Serialize};

use super::{CalibrationSet, CoeffKey, Coefficient, Metric};
use crate::error::{Error, Result};
use crate::model::types::{Strategy, MB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    /// Merge over the shipped coefficients.
    #[default]
    Defaults,
    /// Start from an empty set; every block is then mandatory.
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDocument {
    #[serde(default)]
    pub extends: Base,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kpi: Option<Vec<KpiEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<SigmaEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdl_linear: Option<Vec<SdlLinearEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sm_overhead: Option<Vec<SmOverheadEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xapp_load: Option<Vec<XappLoadEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub server_idle: Option<ServerIdleEntry>,
}

/// Migration timing of one strategy: `delta_*` in seconds per xApp,
/// `b_*` in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpiEntry {
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_m: Option<f64>,
}

/// Defrag downtime per xApp, in milliseconds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_s: Option<f64>,
    pub sigma_ms: f64,
}

/// SDL backend consumption `delta * N_k + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdlLinearEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_s: Option<f64>,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// Constant consumption of the stateful migration engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmOverheadEntry {
    pub strategy: Strategy,
    pub metric: Metric,
    pub b: f64,
}

/// Per-xApp load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XappLoadEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub metric: Metric,
    pub p: f64,
}

/// Idle consumption of an active server.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerIdleEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_cores: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_gb: Option<f64>,
}

fn rho_from_mb(path: &str, mb: Option<f64>) -> Result<Option<u64>> {
    match mb {
        None => Ok(None),
        Some(v) if v > 0.0 && v.is_finite() => Ok(Some((v * MB as f64).round() as u64)),
        Some(v) => Err(load_error(path, format!("rho_mb must be > 0, got {v}"))),
    }
}

fn rho_to_mb(rho: Option<u64>) -> Option<f64> {
    rho.map(|r| r as f64 / MB as f64)
}

fn nu_checked(path: &str, nu: Option<f64>) -> Result<Option<f64>> {
    match nu {
        Some(v) if !(v > 0.0 && v.is_finite()) => {
            Err(load_error(path, format!("nu_s must be > 0, got {v}")))
        }
        other => Ok(other),
    }
}

fn load_error(key: &str, reason: impl Into<String>) -> Error {
    Error::CalibrationLoad {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(load_error(path, "value must be finite"))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(load_error(path, format!("must be >= 0, got {v}")))
    }
}

fn key_of(
    path: &str,
    strategy: Option<Strategy>,
    class: &Option<String>,
    rho_mb: Option<f64>,
    nu_s: Option<f64>,
) -> Result<CoeffKey> {
    Ok(CoeffKey {
        strategy,
        class: class.clone(),
        rho: rho_from_mb(&format!("{path}.rho_mb"), rho_mb)?,
        nu: nu_checked(&format!("{path}.nu_s"), nu_s)?,
    })
}

impl CalibrationDocument {
    pub fn into_calibration(self) -> Result<CalibrationSet> {
        let mut cal = match self.extends {
            Base::Defaults => CalibrationSet::shipped(),
            Base::None => {
                let missing = [
                    ("kpi", self.kpi.is_none()),
                    ("sigma", self.sigma.is_none()),
                    ("sdl_linear", self.sdl_linear.is_none()),
                    ("sm_overhead", self.sm_overhead.is_none()),
                    ("xapp_load", self.xapp_load.is_none()),
                    ("server_idle", self.server_idle.is_none()),
                ];
                if let Some((name, _)) = missing.iter().find(|(_, m)| *m) {
                    return Err(load_error(name, "block is mandatory when extends = none"));
                }
                CalibrationSet::empty()
            }
        };

        for (i, e) in self.kpi.unwrap_or_default().iter().enumerate() {
            let path = format!("kpi[{i}]");
            let key = key_of(&path, Some(e.strategy), &e.class, e.rho_mb, e.nu_s)?;
            let fields = [
                ("delta_d", Coefficient::DowntimeSlope, e.delta_d, true),
                ("b_d", Coefficient::DowntimeIntercept, e.b_d, false),
                ("delta_m", Coefficient::DurationSlope, e.delta_m, true),
                ("b_m", Coefficient::DurationIntercept, e.b_m, false),
            ];
            for (name, coefficient, value, slope) in fields {
                if let Some(v) = value {
                    let p = format!("{path}.{name}");
                    let v = if slope { non_negative(&p, v)? } else { finite(&p, v)? };
                    cal.set(coefficient, key.clone(), v);
                }
            }
        }

        for (i, e) in self.sigma.unwrap_or_default().iter().enumerate() {
            let path = format!("sigma[{i}]");
            let key = key_of(&path, e.strategy, &e.class, e.rho_mb, e.nu_s)?;
            let v = non_negative(&format!("{path}.sigma_ms"), e.sigma_ms)?;
            cal.set(Coefficient::DefragSlopeMs, key, v);
        }

        for (i, e) in self.sdl_linear.unwrap_or_default().iter().enumerate() {
            let path = format!("sdl_linear[{i}]");
            let key = key_of(&path, e.strategy, &e.class, e.rho_mb, e.nu_s)?;
            if let Some(v) = e.delta {
                let v = finite(&format!("{path}.delta"), v)?;
                cal.set(Coefficient::SdlSlope(e.metric), key.clone(), v);
            }
            if let Some(v) = e.b {
                let v = finite(&format!("{path}.b"), v)?;
                cal.set(Coefficient::SdlIntercept(e.metric), key, v);
            }
        }

        for (i, e) in self.sm_overhead.unwrap_or_default().iter().enumerate() {
            let path = format!("sm_overhead[{i}]");
            if !e.strategy.is_stateful() {
                return Err(load_error(&format!("{path}.strategy"), "must be sm-mr or sm-md"));
            }
            let v = non_negative(&format!("{path}.b"), e.b)?;
            cal.set(
                Coefficient::SmOverhead(e.metric),
                CoeffKey::any().strategy(e.strategy),
                v,
            );
        }

        for (i, e) in self.xapp_load.unwrap_or_default().iter().enumerate() {
            let path = format!("xapp_load[{i}]");
            let v = non_negative(&format!("{path}.p"), e.p)?;
            let key = CoeffKey {
                class: e.class.clone(),
                ..CoeffKey::any()
            };
            cal.set(Coefficient::XappLoad(e.metric), key, v);
        }

        if let Some(idle) = self.server_idle {
            let fields = [
                ("energy_w", Metric::Energy, idle.energy_w),
                ("cpu_cores", Metric::Cpu, idle.cpu_cores),
                ("mem_gb", Metric::Mem, idle.mem_gb),
                ("disk_gb", Metric::Disk, idle.disk_gb),
            ];
            for (name, metric, value) in fields {
                if let Some(v) = value {
                    let v = non_negative(&format!("server_idle.{name}"), v)?;
                    cal.set(Coefficient::ServerIdle(metric), CoeffKey::any(), v);
                }
            }
        }

        cal.validate()?;
        Ok(cal)
    }

    /// Complete, self-contained document (`extends: none`) for `cal`.
    pub fn from_calibration(cal: &CalibrationSet) -> Self {
        let mut kpi: Vec<KpiEntry> = Vec::new();
        let mut sigma = Vec::new();
        let mut sdl_linear: Vec<SdlLinearEntry> = Vec::new();
        let mut sm_overhead = Vec::new();
        let mut xapp_load = Vec::new();
        let mut server_idle = ServerIdleEntry::default();

        for (coefficient, key, value) in cal.entries() {
            match coefficient {
                Coefficient::DowntimeSlope
                | Coefficient::DowntimeIntercept
                | Coefficient::DurationSlope
                | Coefficient::DurationIntercept => {
                    let Some(strategy) = key.strategy else { continue };
                    let rho_mb = rho_to_mb(key.rho);
                    let idx = kpi.iter().position(|e| {
                        e.strategy == strategy
                            && e.class == key.class
                            && e.rho_mb == rho_mb
                            && e.nu_s == key.nu
                    });
                    let entry = match idx {
                        Some(i) => &mut kpi[i],
                        None => {
                            kpi.push(KpiEntry {
                                strategy,
                                class: key.class.clone(),
                                rho_mb,
                                nu_s: key.nu,
                                delta_d: None,
                                b_d: None,
                                delta_m: None,
                                b_m: None,
                            });
                            kpi.last_mut().expect("just pushed")
                        }
                    };
                    match coefficient {
                        Coefficient::DowntimeSlope => entry.delta_d = Some(value),
                        Coefficient::DowntimeIntercept => entry.b_d = Some(value),
                        Coefficient::DurationSlope => entry.delta_m = Some(value),
                        _ => entry.b_m = Some(value),
                    }
                }
                Coefficient::DefragSlopeMs => sigma.push(SigmaEntry {
                    strategy: key.strategy,
                    class: key.class.clone(),
                    rho_mb: rho_to_mb(key.rho),
                    nu_s: key.nu,
                    sigma_ms: value,
                }),
                Coefficient::SdlSlope(metric) | Coefficient::SdlIntercept(metric) => {
                    let rho_mb = rho_to_mb(key.rho);
                    let idx = sdl_linear.iter().position(|e| {
                        e.metric == metric
                            && e.strategy == key.strategy
                            && e.class == key.class
                            && e.rho_mb == rho_mb
                            && e.nu_s == key.nu
                    });
                    let entry = match idx {
                        Some(i) => &mut sdl_linear[i],
                        None => {
                            sdl_linear.push(SdlLinearEntry {
                                strategy: key.strategy,
                                class: key.class.clone(),
                                rho_mb,
                                nu_s: key.nu,
                                metric,
                                delta: None,
                                b: None,
                            });
                            sdl_linear.last_mut().expect("just pushed")
                        }
                    };
                    if matches!(coefficient, Coefficient::SdlSlope(_)) {
                        entry.delta = Some(value);
                    } else {
                        entry.b = Some(value);
                    }
                }
                Coefficient::SmOverhead(metric) => {
                    if let Some(strategy) = key.strategy {
                        sm_overhead.push(SmOverheadEntry { strategy, metric, b: value });
                    }
                }
                Coefficient::XappLoad(metric) => xapp_load.push(XappLoadEntry {
                    class: key.class.clone(),
                    metric,
                    p: value,
                }),
                Coefficient::ServerIdle(metric) => {
                    let slot = match metric {
                        Metric::Energy => &mut server_idle.energy_w,
                        Metric::Cpu => &mut server_idle.cpu_cores,
                        Metric::Mem => &mut server_idle.mem_gb,
                        Metric::Disk => &mut server_idle.disk_gb,
                    };
                    *slot = Some(value);
                }
            }
        }

        Self {
            extends: Base::None,
            kpi: Some(kpi),
            sigma: Some(sigma),
            sdl_linear: Some(sdl_linear),
            sm_overhead: Some(sm_overhead),
            xapp_load: Some(xapp_load),
            server_idle: Some(server_idle),
        }
    }
}
