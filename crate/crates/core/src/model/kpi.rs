//! Migration timing and backend-maintenance KPIs.

use serde::{Deserialize, Serialize};

use super::types::{ScenarioParams, Strategy, XAppClass};
use crate::calibration::CalibrationSet;
use crate::error::{Error, Result};

/// Aggregate message rate of `count` xApps of `class`, bytes per second.
pub fn traffic_load(class: &XAppClass, count: u32) -> f64 {
    count as f64 * class.msg_size / class.msg_period
}

/// Downtime of `outgoing` stateful migrations from one server.
pub fn sm_downtime(strategy: Strategy, outgoing: u32, rho: u64, cal: &CalibrationSet) -> Result<f64> {
    if !strategy.is_stateful() {
        return Err(Error::ModelDomain(
            "sm_downtime requires a stateful strategy".into(),
        ));
    }
    Ok(cal.kpi(strategy, rho)?.downtime.eval_count(outgoing))
}

/// Migration through the shared data layer never interrupts service.
pub fn sdl_downtime() -> f64 {
    0.0
}

/// Downtime for any strategy.
pub fn downtime(strategy: Strategy, outgoing: u32, rho: u64, cal: &CalibrationSet) -> Result<f64> {
    match strategy {
        Strategy::Sdl => Ok(sdl_downtime()),
        _ => sm_downtime(strategy, outgoing, rho, cal),
    }
}

/// Total time to migrate `outgoing` xApps off one server; zero when nothing
/// moves.
pub fn migration_duration(
    strategy: Strategy,
    outgoing: u32,
    rho: u64,
    cal: &CalibrationSet,
) -> Result<f64> {
    Ok(cal.kpi(strategy, rho)?.duration.eval_count(outgoing))
}

/// Time to start `new_count` fresh xApps on one server; zero when none.
pub fn instantiation_time(new_count: u32, cal: &CalibrationSet) -> Result<f64> {
    Ok(cal.instantiation()?.eval_count(new_count))
}

/// Per-xApp defrag downtime of every class, in seconds.
pub fn defrag_slopes(
    classes: &[XAppClass],
    params: &ScenarioParams,
    cal: &CalibrationSet,
) -> Result<Vec<f64>> {
    classes
        .iter()
        .map(|c| cal.sigma(&c.id, params.state_size, params.maintenance_period))
        .collect()
}

/// Backend defrag downtime `Σ σ_k N_k` for the cluster-wide class counts.
pub fn defrag_downtime(
    classes: &[XAppClass],
    counts: &[u32],
    params: &ScenarioParams,
    cal: &CalibrationSet,
) -> Result<f64> {
    check_len(classes, counts)?;
    let sigma = defrag_slopes(classes, params, cal)?;
    Ok(sigma.iter().zip(counts).map(|(s, &n)| s * n as f64).sum())
}

/// Outcome of the backend maintenance check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdlFeasibility {
    pub feasible: bool,
    pub defrag_downtime: f64,
    /// Maintenance period minus defrag downtime.
    pub active_time: f64,
    /// `max_defrag_downtime - defrag_downtime`; must be positive.
    pub defrag_margin: f64,
}

impl SdlFeasibility {
    pub fn evaluate(defrag_downtime: f64, params: &ScenarioParams) -> Self {
        let active_time = params.maintenance_period - defrag_downtime;
        let defrag_margin = params.max_defrag_downtime - defrag_downtime;
        Self {
            feasible: defrag_margin > 0.0 && active_time > 0.0,
            defrag_downtime,
            active_time,
            defrag_margin,
        }
    }
}

pub fn sdl_feasible(
    classes: &[XAppClass],
    counts: &[u32],
    params: &ScenarioParams,
    cal: &CalibrationSet,
) -> Result<SdlFeasibility> {
    let t = defrag_downtime(classes, counts, params, cal)?;
    Ok(SdlFeasibility::evaluate(t, params))
}

pub(crate) fn check_len(classes: &[XAppClass], counts: &[u32]) -> Result<()> {
    if classes.len() != counts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} classes but {} counts",
            classes.len(),
            counts.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::MB;

    fn rel(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
    }

    fn class(id: &str) -> XAppClass {
        XAppClass::reference(id).unwrap()
    }

    #[test]
    fn traffic() {
        assert_eq!(traffic_load(&class("A"), 10), 1000.0);
        assert_eq!(traffic_load(&class("B"), 0), 0.0);
        assert!(rel(traffic_load(&class("D"), 1), 1_000_000.0));
    }

    #[test]
    fn stateful_downtime() {
        let cal = CalibrationSet::shipped();
        assert!(rel(sm_downtime(Strategy::SmMr, 20, MB, &cal).unwrap(), 20.0 * 10.55));
        assert!(rel(sm_downtime(Strategy::SmMd, 3, 10 * MB, &cal).unwrap(), 3.0 * 6.49));
        assert_eq!(sm_downtime(Strategy::SmMd, 0, MB, &cal).unwrap(), 0.0);
        assert!(sm_downtime(Strategy::Sdl, 1, MB, &cal).is_err());
        assert_eq!(downtime(Strategy::Sdl, 40, 100 * MB, &cal).unwrap(), 0.0);
    }

    #[test]
    fn unknown_state_size_is_a_miss() {
        let cal = CalibrationSet::shipped();
        assert!(matches!(
            sm_downtime(Strategy::SmMr, 1, 5 * MB, &cal),
            Err(Error::CalibrationLookup { .. })
        ));
    }

    #[test]
    fn durations() {
        let cal = CalibrationSet::shipped();
        assert!(rel(migration_duration(Strategy::SmMd, 5, MB, &cal).unwrap(), 5.0 * 20.28));
        assert!(rel(migration_duration(Strategy::Sdl, 10, MB, &cal).unwrap(), 0.8 + 4.27));
        assert!(rel(migration_duration(Strategy::SmMr, 2, 100 * MB, &cal).unwrap(), 2.0 * 23.3));
        assert_eq!(migration_duration(Strategy::Sdl, 0, MB, &cal).unwrap(), 0.0);
        assert!(rel(instantiation_time(10, &cal).unwrap(), 0.8 + 4.27));
        assert!(rel(instantiation_time(1, &cal).unwrap(), 0.08 + 4.27));
        assert_eq!(instantiation_time(0, &cal).unwrap(), 0.0);
    }

    #[test]
    fn defrag() {
        let cal = CalibrationSet::shipped();
        let p = ScenarioParams::default();
        let abcd: Vec<_> = ["A", "B", "C", "D"].iter().map(|c| class(c)).collect();
        let t = defrag_downtime(&abcd, &[50, 0, 0, 0], &p, &cal).unwrap();
        assert!(rel(t, 50.0 * 0.01662));
        let t = defrag_downtime(&abcd, &[0, 0, 30, 30], &p, &cal).unwrap();
        assert!(rel(t, 30.0 * 0.00771 + 30.0 * 0.01162));
        assert_eq!(defrag_downtime(&abcd, &[0; 4], &p, &cal).unwrap(), 0.0);
    }

    #[test]
    fn sdl_boundary() {
        let cal = CalibrationSet::shipped();
        let p = ScenarioParams {
            strategy: Strategy::Sdl,
            ..ScenarioParams::default()
        };
        let a = [class("A")];
        let ok = sdl_feasible(&a, &[60], &p, &cal).unwrap();
        assert!(ok.feasible);
        assert!(rel(ok.defrag_downtime, 60.0 * 0.01662));
        assert!(!sdl_feasible(&a, &[61], &p, &cal).unwrap().feasible);
        assert!(sdl_feasible(&a, &[0], &p, &cal).unwrap().feasible);
    }

    #[test]
    fn sigma_outside_tabulated_regime_is_a_miss() {
        let cal = CalibrationSet::shipped();
        let p = ScenarioParams {
            state_size: 100 * MB,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            defrag_downtime(&[class("A")], &[1], &p, &cal),
            Err(Error::CalibrationLookup { .. })
        ));
    }
}
