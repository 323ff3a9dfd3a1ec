//! Deterministic artifact formatting: floats rounded to six significant
//! digits, stable field order, fixed CSV header.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sal_core::orchestrator::SweepRow;
use sal_core::solver::Flows;
use sal_core::{MigrationPlan, SolveStatus, SolverChoice, Strategy};

pub const SIGNIFICANT_DIGITS: usize = 6;

pub const CSV_HEADER: [&str; 10] = [
    "strategy",
    "class",
    "rho_mb",
    "nu_s",
    "n_total",
    "feasible",
    "energy_gain",
    "activation_ratio",
    "mip_gap",
    "runtime_s",
];

/// Rounds to `digits` significant digits; zero and non-finite values pass
/// through.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let r: f64 = format!("{v:.*e}", digits.saturating_sub(1)).parse().unwrap_or(v);
    // avoid "-0"
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn format_number(v: f64) -> String {
    round_sig(v, SIGNIFICANT_DIGITS).to_string()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap_or(0.0), SIGNIFICANT_DIGITS);
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Units of the numeric fields in JSON artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub energy: String,
    pub time: String,
    pub state_size: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            energy: "J".into(),
            time: "s".into(),
            state_size: "bytes".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanArtifact {
    #[serde(default)]
    pub units: Units,
    #[serde(flatten)]
    pub plan: MigrationPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub units: Units,
    pub solver: SolverChoice,
    pub strategy: Strategy,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub mip_gap: Option<f64>,
    pub nodes_explored: u64,
    /// Present only when timing output was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasibility: Option<String>,
    pub baseline_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_issue: Option<String>,
    pub energy_gain: Option<f64>,
    pub activation_ratio: Option<f64>,
}

/// What `plan` prints when no output directory is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combined {
    pub plan: Option<PlanArtifact>,
    pub report: ReportArtifact,
}

/// The decision part of a plan file; derived figures are recomputed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PlanInput {
    pub x: Flows,
    pub mu: Vec<bool>,
}

/// Reads either a `plan.json` or the combined document.
pub fn parse_plan(text: &str) -> Result<PlanInput> {
    let v: Value = crate::files::parse_json(text)?;
    let plan = match v.get("plan") {
        Some(Value::Null) => anyhow::bail!("document holds no plan (the slot was infeasible)"),
        Some(p) => p.clone(),
        None => v,
    };
    crate::files::parse_json(&plan.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Writes sweep rows as CSV. Runtimes stay empty unless `timing` is set.
pub fn write_csv<W: Write>(rows: &[SweepRow], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.strategy.as_str().to_string(),
            r.class.clone(),
            format_number(r.rho_mb),
            format_number(r.nu_s),
            r.n_total.to_string(),
            r.feasible.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.energy_gain),
            opt(r.activation_ratio),
            opt(r.mip_gap),
            if timing { opt(r.runtime_s) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}
