//! Fitted coefficients that parameterize the timing, resource and energy
//! models.
//!
//! Every coefficient is stored under a [`CoeffKey`] of
//! (strategy, class, state size, maintenance period) where any component may
//! be a wildcard. A lookup returns the most specific matching entry; a miss is
//! always an error, never an interpolation.

mod defaults;
mod document;
mod fit;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::types::{Resource, Strategy, MB};

pub use document::{
    CalibrationDocument, KpiEntry, SdlLinearEntry, ServerIdleEntry, SigmaEntry, SmOverheadEntry,
    XappLoadEntry,
};
pub use fit::{fit_linear, LinearFit, MeasurementSeries};

/// What a coefficient measures: energy (watts) or one of the capacity
/// resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "E")]
    Energy,
    #[serde(rename = "CPU")]
    Cpu,
    #[serde(rename = "MEM")]
    Mem,
    #[serde(rename = "DISK")]
    Disk,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Energy, Metric::Cpu, Metric::Mem, Metric::Disk];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Energy => "E",
            Metric::Cpu => "CPU",
            Metric::Mem => "MEM",
            Metric::Disk => "DISK",
        }
    }
}

impl From<Resource> for Metric {
    fn from(r: Resource) -> Self {
        match r {
            Resource::Cpu => Metric::Cpu,
            Resource::Mem => Metric::Mem,
            Resource::Disk => Metric::Disk,
        }
    }
}

/// Identifies a coefficient family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficient {
    /// Downtime slope, seconds per migrated xApp.
    DowntimeSlope,
    /// Downtime intercept, seconds.
    DowntimeIntercept,
    /// Migration-duration slope, seconds per migrated xApp.
    DurationSlope,
    /// Migration-duration intercept, seconds.
    DurationIntercept,
    /// Defrag downtime per xApp. Stored in milliseconds as tabulated;
    /// [`CalibrationSet::sigma`] converts to seconds.
    DefragSlopeMs,
    /// Per-xApp slope of the SDL backend consumption.
    SdlSlope(Metric),
    /// Intercept of the SDL backend consumption.
    SdlIntercept(Metric),
    /// Constant consumption of the stateful migration engine.
    SmOverhead(Metric),
    /// Per-xApp load.
    XappLoad(Metric),
    /// Idle consumption of an active server.
    ServerIdle(Metric),
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::DowntimeSlope => f.write_str("delta_D"),
            Coefficient::DowntimeIntercept => f.write_str("b_D"),
            Coefficient::DurationSlope => f.write_str("delta_M"),
            Coefficient::DurationIntercept => f.write_str("b_M"),
            Coefficient::DefragSlopeMs => f.write_str("sigma"),
            Coefficient::SdlSlope(m) => write!(f, "sdl_delta_{}", m.as_str()),
            Coefficient::SdlIntercept(m) => write!(f, "sdl_b_{}", m.as_str()),
            Coefficient::SmOverhead(m) => write!(f, "sm_b_{}", m.as_str()),
            Coefficient::XappLoad(m) => write!(f, "p_{}", m.as_str()),
            Coefficient::ServerIdle(m) => write!(f, "q_{}", m.as_str()),
        }
    }
}

/// Key under which a coefficient is stored. `None` components are wildcards.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffKey {
    pub strategy: Option<Strategy>,
    pub class: Option<String>,
    /// State size in bytes.
    pub rho: Option<u64>,
    /// Maintenance period in seconds.
    pub nu: Option<f64>,
}

impl CoeffKey {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn strategy(mut self, s: Strategy) -> Self {
        self.strategy = Some(s);
        self
    }

    pub fn class(mut self, c: impl Into<String>) -> Self {
        self.class = Some(c.into());
        self
    }

    pub fn rho(mut self, bytes: u64) -> Self {
        self.rho = Some(bytes);
        self
    }

    pub fn nu(mut self, seconds: f64) -> Self {
        self.nu = Some(seconds);
        self
    }

    fn matches(&self, q: &Query<'_>) -> bool {
        self.strategy.is_none_or(|s| q.strategy == Some(s))
            && self.class.as_deref().is_none_or(|c| q.class == Some(c))
            && self.rho.is_none_or(|r| q.rho == Some(r))
            && self.nu.is_none_or(|n| q.nu == Some(n))
    }

    /// Ranks keys for precedence: a specified class outranks everything else,
    /// then the number of specified components.
    fn specificity(&self) -> (bool, usize) {
        let count = self.strategy.is_some() as usize
            + self.class.is_some() as usize
            + self.rho.is_some() as usize
            + self.nu.is_some() as usize;
        (self.class.is_some(), count)
    }
}

impl fmt::Display for CoeffKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strategy = self.strategy.map_or("*".to_string(), |s| s.to_string());
        let class = self.class.clone().unwrap_or_else(|| "*".into());
        let rho = self.rho.map_or("*".to_string(), |r| format!("{}MB", r as f64 / MB as f64));
        let nu = self.nu.map_or("*".to_string(), |n| format!("{n}s"));
        write!(f, "strategy={strategy}, class={class}, rho={rho}, nu={nu}")
    }
}

/// A fully specified request for a coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query<'a> {
    pub coefficient: Coefficient,
    pub strategy: Option<Strategy>,
    pub class: Option<&'a str>,
    pub rho: Option<u64>,
    pub nu: Option<f64>,
}

impl<'a> Query<'a> {
    pub fn new(coefficient: Coefficient) -> Self {
        Self {
            coefficient,
            strategy: None,
            class: None,
            rho: None,
            nu: None,
        }
    }

    pub fn strategy(mut self, s: Strategy) -> Self {
        self.strategy = Some(s);
        self
    }

    pub fn class(mut self, c: &'a str) -> Self {
        self.class = Some(c);
        self
    }

    pub fn rho(mut self, bytes: u64) -> Self {
        self.rho = Some(bytes);
        self
    }

    pub fn nu(mut self, seconds: f64) -> Self {
        self.nu = Some(seconds);
        self
    }
}

impl fmt::Display for Query<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if let Some(s) = self.strategy {
            write!(f, " strategy={s}")?;
        }
        if let Some(c) = self.class {
            write!(f, " class={c}")?;
        }
        if let Some(r) = self.rho {
            write!(f, " rho={}MB", r as f64 / MB as f64)?;
        }
        if let Some(n) = self.nu {
            write!(f, " nu={n}s")?;
        }
        Ok(())
    }
}

/// Slope and intercept of an affine model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    /// `slope * x + intercept`, floored at zero.
    pub fn eval(&self, x: f64) -> f64 {
        (self.slope * x + self.intercept).max(0.0)
    }

    /// Like [`Affine::eval`] for a count of xApps, but zero when nothing is
    /// counted: the intercept models fixed setup work that only happens when
    /// at least one xApp is handled.
    pub fn eval_count(&self, n: u32) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.eval(n as f64)
        }
    }
}

/// The four timing coefficients of one strategy at one state size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KpiCoeffs {
    pub downtime: Affine,
    pub duration: Affine,
}

/// Immutable set of coefficients.
#[derive(Debug, Clone, Default)]
pub struct CalibrationSet {
    entries: BTreeMap<Coefficient, Vec<(CoeffKey, f64)>>,
}

/// Two sets are equal when they hold the same (key, value) pairs for every
/// coefficient, regardless of insertion order.
impl PartialEq for CalibrationSet {
    fn eq(&self, other: &Self) -> bool {
        let non_empty = |s: &Self| s.entries.values().filter(|l| !l.is_empty()).count();
        non_empty(self) == non_empty(other)
            && self.entries.iter().all(|(c, list)| {
                let theirs = other.entries.get(c).map(Vec::as_slice).unwrap_or(&[]);
                list.len() == theirs.len()
                    && list.iter().all(|(k, v)| {
                        theirs
                            .iter()
                            .any(|(k2, v2)| k == k2 && v.to_bits() == v2.to_bits())
                    })
            })
    }
}

impl CalibrationSet {
    /// A set with no coefficients at all.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped reference coefficients.
    pub fn shipped() -> Self {
        defaults::shipped()
    }

    /// Inserts or replaces the value stored under exactly `key`.
    pub fn set(&mut self, coefficient: Coefficient, key: CoeffKey, value: f64) {
        let list = self.entries.entry(coefficient).or_default();
        if let Some(slot) = list.iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
        } else {
            list.push((key, value));
        }
    }

    /// Most specific value matching `query`.
    pub fn lookup(&self, query: &Query<'_>) -> Result<f64> {
        self.entries
            .get(&query.coefficient)
            .and_then(|list| {
                list.iter()
                    .filter(|(k, _)| k.matches(query))
                    // max_by_key returns the last maximum; reverse keeps the first.
                    .rev()
                    .max_by_key(|(k, _)| k.specificity())
            })
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::CalibrationLookup {
                key: query.to_string(),
            })
    }

    /// Every stored entry, ordered by coefficient then insertion.
    pub fn entries(&self) -> impl Iterator<Item = (Coefficient, &CoeffKey, f64)> + '_ {
        self.entries
            .iter()
            .flat_map(|(c, list)| list.iter().map(move |(k, v)| (*c, k, *v)))
    }

    pub fn kpi(&self, strategy: Strategy, rho: u64) -> Result<KpiCoeffs> {
        let q = |c| Query::new(c).strategy(strategy).rho(rho);
        Ok(KpiCoeffs {
            downtime: Affine::new(
                self.lookup(&q(Coefficient::DowntimeSlope))?,
                self.lookup(&q(Coefficient::DowntimeIntercept))?,
            ),
            duration: Affine::new(
                self.lookup(&q(Coefficient::DurationSlope))?,
                self.lookup(&q(Coefficient::DurationIntercept))?,
            ),
        })
    }

    /// Time to start new xApps; the state is empty so this is the SDL
    /// (stateless) migration duration.
    pub fn instantiation(&self) -> Result<Affine> {
        let q = |c| Query::new(c).strategy(Strategy::Sdl);
        Ok(Affine::new(
            self.lookup(&q(Coefficient::DurationSlope))?,
            self.lookup(&q(Coefficient::DurationIntercept))?,
        ))
    }

    /// Defrag downtime per xApp of `class`, in seconds.
    pub fn sigma(&self, class: &str, rho: u64, nu: f64) -> Result<f64> {
        let ms = self.lookup(
            &Query::new(Coefficient::DefragSlopeMs)
                .strategy(Strategy::Sdl)
                .class(class)
                .rho(rho)
                .nu(nu),
        )?;
        Ok(ms / 1000.0)
    }

    pub fn sdl_linear(&self, class: &str, metric: Metric, rho: u64, nu: f64) -> Result<Affine> {
        let q = |c| {
            Query::new(c)
                .strategy(Strategy::Sdl)
                .class(class)
                .rho(rho)
                .nu(nu)
        };
        Ok(Affine::new(
            self.lookup(&q(Coefficient::SdlSlope(metric)))?,
            self.lookup(&q(Coefficient::SdlIntercept(metric)))?,
        ))
    }

    pub fn sm_overhead(&self, strategy: Strategy, metric: Metric) -> Result<f64> {
        self.lookup(&Query::new(Coefficient::SmOverhead(metric)).strategy(strategy))
    }

    pub fn xapp_load(&self, class: &str, metric: Metric) -> Result<f64> {
        self.lookup(&Query::new(Coefficient::XappLoad(metric)).class(class))
    }

    pub fn server_idle(&self, metric: Metric) -> Result<f64> {
        self.lookup(&Query::new(Coefficient::ServerIdle(metric)))
    }

    /// Checks sign invariants: defrag slopes, timing slopes, per-xApp loads
    /// and idle figures are non-negative. SDL backend slopes may be negative.
    pub fn validate(&self) -> Result<()> {
        for (coefficient, key, value) in self.entries() {
            if !value.is_finite() {
                return Err(Error::CalibrationLoad {
                    key: format!("{coefficient} [{key}]"),
                    reason: "value must be finite".into(),
                });
            }
            let must_be_non_negative = matches!(
                coefficient,
                Coefficient::DefragSlopeMs
                    | Coefficient::DowntimeSlope
                    | Coefficient::DurationSlope
                    | Coefficient::XappLoad(_)
                    | Coefficient::ServerIdle(_)
                    | Coefficient::SmOverhead(_)
            );
            if must_be_non_negative && value < 0.0 {
                return Err(Error::CalibrationLoad {
                    key: format!("{coefficient} [{key}]"),
                    reason: format!("must be >= 0, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Parses a JSON calibration document. Blocks present in the document
    /// are merged over the shipped defaults unless the document sets
    /// `"extends": "none"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CalibrationDocument =
            serde_json::from_str(text).map_err(|e| Error::CalibrationLoad {
                key: format!("line {} column {}", e.line(), e.column()),
                reason: e.to_string(),
            })?;
        doc.into_calibration()
    }

    pub fn to_document(&self) -> CalibrationDocument {
        CalibrationDocument::from_calibration(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("calibration serializes")
    }
}
