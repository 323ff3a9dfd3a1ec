//! Shipped reference coefficients, measured on a four-node testbed.

use super::{CalibrationSet, CoeffKey, Coefficient, Metric};
use crate::model::types::{Strategy, MB};

/// Stateful-migration slopes by state size:
/// (rho in MB, downtime slope SM-MR, downtime slope SM-MD, duration slope SM-MD).
const SM_KPI: [(u64, f64, f64, f64); 3] = [
    (1, 10.55, 5.74, 20.28),
    (10, 11.73, 6.49, 23.02),
    (100, 23.3, 13.3, 48.2),
];

/// Stateless migration / instantiation: slope and intercept in seconds.
const SDL_DURATION: (f64, f64) = (0.08, 4.27);

/// Backend figures per class, measured at rho = 1 MB and nu = 1 s:
/// slopes (E, CPU, MEM, DISK), intercepts (E, CPU, MEM, DISK), defrag ms.
const SDL_BACKEND: [(&str, [f64; 4], [f64; 4], f64); 4] = [
    ("A", [-0.18, -0.00, 0.04, 0.01], [32.35, 5.32, 0.20, 0.00], 16.62),
    ("B", [-0.09, 0.03, 0.04, 0.01], [33.60, 5.57, 0.17, 0.00], 17.07),
    ("C", [-0.10, -0.03, 0.02, 0.00], [35.48, 4.97, 1.82, 0.00], 7.71),
    ("D", [-0.06, -0.01, 0.08, 0.03], [40.20, 5.00, 1.04, 0.00], 11.62),
];

/// Per-xApp load (E watts, CPU cores, MEM GB).
const XAPP_LOAD: [(&str, [f64; 3]); 4] = [
    ("A", [3.43, 0.47, 0.52]),
    ("B", [16.48, 2.86, 0.52]),
    ("C", [3.43, 0.47, 0.52]),
    ("D", [16.48, 2.86, 0.52]),
];

/// Migration engine constants (CPU cores, E watts).
const SM_OVERHEAD: [(Strategy, f64, f64); 2] = [
    (Strategy::SmMr, 0.40, 17.87),
    (Strategy::SmMd, 0.76, 27.56),
];

/// Idle server (E watts, CPU cores, MEM GB, DISK GB).
const SERVER_IDLE: [f64; 4] = [120.0, 0.1, 5.7, 3.2];

pub(super) const SDL_RHO: u64 = MB;
pub(super) const SDL_NU: f64 = 1.0;

pub(super) fn shipped() -> CalibrationSet {
    let mut cal = CalibrationSet::empty();

    for (rho_mb, mr_down, md_down, md_dur) in SM_KPI {
        let rho = rho_mb * MB;
        let mr = CoeffKey::any().strategy(Strategy::SmMr).rho(rho);
        cal.set(Coefficient::DowntimeSlope, mr.clone(), mr_down);
        // cold migration: the whole migration is downtime
        cal.set(Coefficient::DurationSlope, mr, mr_down);
        let md = CoeffKey::any().strategy(Strategy::SmMd).rho(rho);
        cal.set(Coefficient::DowntimeSlope, md.clone(), md_down);
        cal.set(Coefficient::DurationSlope, md, md_dur);
    }
    for strategy in [Strategy::SmMr, Strategy::SmMd] {
        let key = CoeffKey::any().strategy(strategy);
        cal.set(Coefficient::DowntimeIntercept, key.clone(), 0.0);
        cal.set(Coefficient::DurationIntercept, key, 0.0);
    }

    let sdl = CoeffKey::any().strategy(Strategy::Sdl);
    cal.set(Coefficient::DowntimeSlope, sdl.clone(), 0.0);
    cal.set(Coefficient::DowntimeIntercept, sdl.clone(), 0.0);
    cal.set(Coefficient::DurationSlope, sdl.clone(), SDL_DURATION.0);
    cal.set(Coefficient::DurationIntercept, sdl, SDL_DURATION.1);

    for (class, slopes, intercepts, sigma_ms) in SDL_BACKEND {
        let key = CoeffKey::any()
            .strategy(Strategy::Sdl)
            .class(class)
            .rho(SDL_RHO)
            .nu(SDL_NU);
        cal.set(Coefficient::DefragSlopeMs, key.clone(), sigma_ms);
        for metric in Metric::ALL {
            let i = metric.index();
            cal.set(Coefficient::SdlSlope(metric), key.clone(), slopes[i]);
            cal.set(Coefficient::SdlIntercept(metric), key.clone(), intercepts[i]);
        }
    }

    for (class, load) in XAPP_LOAD {
        let key = CoeffKey::any().class(class);
        cal.set(Coefficient::XappLoad(Metric::Energy), key.clone(), load[0]);
        cal.set(Coefficient::XappLoad(Metric::Cpu), key.clone(), load[1]);
        cal.set(Coefficient::XappLoad(Metric::Mem), key, load[2]);
    }
    cal.set(Coefficient::XappLoad(Metric::Disk), CoeffKey::any(), 0.0);

    for (strategy, cpu, energy) in SM_OVERHEAD {
        let key = CoeffKey::any().strategy(strategy);
        cal.set(Coefficient::SmOverhead(Metric::Cpu), key.clone(), cpu);
        cal.set(Coefficient::SmOverhead(Metric::Energy), key.clone(), energy);
        cal.set(Coefficient::SmOverhead(Metric::Mem), key.clone(), 0.0);
        cal.set(Coefficient::SmOverhead(Metric::Disk), key, 0.0);
    }

    for metric in Metric::ALL {
        cal.set(
            Coefficient::ServerIdle(metric),
            CoeffKey::any(),
            SERVER_IDLE[metric.index()],
        );
    }
    cal
}
