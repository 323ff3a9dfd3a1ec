//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when the
//! output is captured. The process exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::oracle::{self, rel_close, Mode, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sal_core::calibration::{fit_linear, Coefficient, MeasurementSeries, Metric, Query};
use sal_core::model::{self, ModelContext};
use sal_core::orchestrator::{
    apply_undeployments, baseline_plan, feasibility_sweep, max_feasible, run_timeslot, SlotConfig, SweepSpec,
    UndeployPolicy,
};
use sal_core::solver::{
    build_problem, solve_bnb, solve_bruteforce, validate_plan, Constraint, SolveLimits, SolveStatus,
};
use sal_core::{CalibrationSet, ClusterState, Resource, ScenarioParams, Strategy, XAppClass, MB};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if rel_close(got, want, tol) || (got == 0.0 && want == 0.0) {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want}"))
    }
}

fn lookup(cal: &CalibrationSet, q: Query<'_>) -> f64 {
    cal.lookup(&q).unwrap_or(f64::NAN)
}

fn criterion_1() -> Check {
    let cal = CalibrationSet::shipped();
    let mut cells = 0;
    let mut exact = |label: String, got: f64, want: f64| -> Result<(), String> {
        cells += 1;
        if got == want {
            Ok(())
        } else {
            Err(format!("{label}: shipped {got}, table {want}"))
        }
    };
    let sdl = |c, class| Query::new(c).strategy(Strategy::Sdl).class(class).rho(MB).nu(1.0);
    for row in &oracle::CLASSES {
        let q = |c| sdl(c, row.id);
        for m in Metric::ALL {
            let i = m.index();
            exact(format!("{} slope {m:?}", row.id), lookup(&cal, q(Coefficient::SdlSlope(m))), row.slope[i])?;
            exact(format!("{} intercept {m:?}", row.id), lookup(&cal, q(Coefficient::SdlIntercept(m))), row.intercept[i])?;
        }
        exact(format!("{} sigma", row.id), lookup(&cal, q(Coefficient::DefragSlopeMs)), row.sigma_ms)?;
        for (i, m) in [Metric::Energy, Metric::Cpu, Metric::Mem].into_iter().enumerate() {
            exact(format!("{} p_{m:?}", row.id), cal.xapp_load(row.id, m).unwrap(), row.load[i])?;
        }
    }
    let sdl_dur = cal.kpi(Strategy::Sdl, MB).unwrap().duration;
    exact("SDL delta_M".into(), sdl_dur.slope, oracle::SDL_DUR_SLOPE)?;
    exact("SDL b_M".into(), sdl_dur.intercept, oracle::SDL_DUR_INTERCEPT)?;
    for (i, s) in [Strategy::SmMr, Strategy::SmMd].into_iter().enumerate() {
        exact(format!("{s} b_CPU"), cal.sm_overhead(s, Metric::Cpu).unwrap(), oracle::SM_CPU[i])?;
        exact(format!("{s} b_E"), cal.sm_overhead(s, Metric::Energy).unwrap(), oracle::SM_E[i])?;
    }
    for m in Metric::ALL {
        exact(format!("q_{m:?}"), cal.server_idle(m).unwrap(), oracle::IDLE[m.index()])?;
    }
    for (rho, mr, md_d, md_m) in oracle::SM_SLOPES {
        let rho = (rho * MB as f64) as u64;
        exact(format!("SM-MR delta_D {rho}"), cal.kpi(Strategy::SmMr, rho).unwrap().downtime.slope, mr)?;
        exact(format!("SM-MD delta_D {rho}"), cal.kpi(Strategy::SmMd, rho).unwrap().downtime.slope, md_d)?;
        exact(format!("SM-MD delta_M {rho}"), cal.kpi(Strategy::SmMd, rho).unwrap().duration.slope, md_m)?;
    }
    // spot list
    exact("q_E".into(), cal.server_idle(Metric::Energy).unwrap(), 120.0)?;
    exact("b_E SM-MD".into(), cal.sm_overhead(Strategy::SmMd, Metric::Energy).unwrap(), 27.56)?;
    exact("delta_D SM-MR 10 MB".into(), cal.kpi(Strategy::SmMr, 10 * MB).unwrap().downtime.slope, 11.73)?;
    exact("sigma_A".into(), lookup(&cal, sdl(Coefficient::DefragSlopeMs, "A")), 16.62)?;
    exact("p_E B".into(), cal.xapp_load("B", Metric::Energy).unwrap(), 16.48)?;
    Ok(format!("{cells} table cells match exactly"))
}

fn ctx(classes: &[&str], servers: usize, totals: &[u32], strategy: Strategy) -> ModelContext {
    let classes: Vec<XAppClass> = classes.iter().map(|id| XAppClass::reference(id).unwrap()).collect();
    ModelContext::new(&classes, servers, totals, &common::params(strategy), &CalibrationSet::shipped()).unwrap()
}

/// `(label, library value, oracle value, frozen oracle output)`.
#[allow(clippy::vec_init_then_push)]
fn derived_values() -> Vec<(&'static str, f64, f64, f64)> {
    let cal = CalibrationSet::shipped();
    let a = XAppClass::reference("A").unwrap();
    let d = XAppClass::reference("D").unwrap();
    let p = common::params(Strategy::Sdl);
    let mut v = Vec::new();

    v.push(("traffic A x10", model::traffic_load(&a, 10), 10.0 * 100.0 / 1.0, 1000.0));
    v.push(("traffic D x1", model::traffic_load(&d, 1), 100_000.0 / 0.1, 1_000_000.0));
    v.push((
        "SM-MR downtime 20",
        model::sm_downtime(Strategy::SmMr, 20, MB, &cal).unwrap(),
        oracle::downtime(Mode::Mr, 1.0, 20),
        211.0,
    ));
    v.push((
        "SM-MD downtime 3 @10MB",
        model::sm_downtime(Strategy::SmMd, 3, 10 * MB, &cal).unwrap(),
        oracle::downtime(Mode::Md, 10.0, 3),
        19.47,
    ));
    v.push((
        "SM-MD duration 5",
        model::migration_duration(Strategy::SmMd, 5, MB, &cal).unwrap(),
        oracle::duration(Mode::Md, 1.0, 5),
        101.4,
    ));
    v.push((
        "SDL duration 10",
        model::migration_duration(Strategy::Sdl, 10, MB, &cal).unwrap(),
        oracle::duration(Mode::Sdl, 1.0, 10),
        5.07,
    ));
    v.push((
        "SM-MR duration 2 @100MB",
        model::migration_duration(Strategy::SmMr, 2, 100 * MB, &cal).unwrap(),
        oracle::duration(Mode::Mr, 100.0, 2),
        46.6,
    ));
    v.push(("instantiation 10", model::instantiation_time(10, &cal).unwrap(), oracle::instantiation(10), 5.07));
    v.push(("instantiation 1", model::instantiation_time(1, &cal).unwrap(), oracle::instantiation(1), 4.35));
    v.push((
        "defrag 50 A",
        model::defrag_downtime(std::slice::from_ref(&a), &[50], &p, &cal).unwrap(),
        oracle::defrag(&[("A", 50)]),
        0.831,
    ));
    let cd = [XAppClass::reference("C").unwrap(), d.clone()];
    v.push((
        "defrag 30 C + 30 D",
        model::defrag_downtime(&cd, &[30, 30], &p, &cal).unwrap(),
        oracle::defrag(&[("C", 30), ("D", 30)]),
        0.5799,
    ));
    v.push((
        "defrag 60 A",
        model::sdl_feasible(std::slice::from_ref(&a), &[60], &p, &cal).unwrap().defrag_downtime,
        oracle::defrag(&[("A", 60)]),
        0.9972,
    ));
    v.push((
        "defrag 61 A",
        model::sdl_feasible(std::slice::from_ref(&a), &[61], &p, &cal).unwrap().defrag_downtime,
        oracle::defrag(&[("A", 61)]),
        1.01382,
    ));
    let sdl10 = ctx(&["A"], 4, &[10], Strategy::Sdl);
    v.push((
        "SDL CPU share 10 A / 4",
        model::strategy_overhead(&sdl10, Resource::Cpu, true, false),
        oracle::sdl_share(&[("A", 10)], 4, 1),
        1.33,
    ));
    v.push((
        "CPU 10 A staying, SDL",
        model::server_resources(&sdl10, &[10], true, false)[0],
        oracle::IDLE[1] + 10.0 * oracle::class("A").load[1] + oracle::sdl_share(&[("A", 10)], 4, 1),
        6.13,
    ));
    let mr_b = ctx(&["B"], 4, &[2], Strategy::SmMr);
    v.push((
        "CPU 2 B, no overhead",
        model::server_resources(&mr_b, &[2], true, false)[0],
        oracle::IDLE[1] + 2.0 * oracle::class("B").load[1],
        5.82,
    ));
    v.push((
        "SM-MR energy 211 s",
        model::sm_migration_energy(Strategy::SmMr, 211.0, &cal).unwrap(),
        oracle::SM_E[0] * 211.0,
        3770.57,
    ));
    v.push((
        "SM-MD energy 100 s",
        model::sm_migration_energy(Strategy::SmMd, 100.0, &cal).unwrap(),
        oracle::SM_E[1] * 100.0,
        2756.0,
    ));
    v.push((
        "SDL energy 40 A / 4",
        model::sdl_energy_per_server(&ctx(&["A"], 4, &[40], Strategy::Sdl)),
        3600.0 * oracle::sdl_share(&[("A", 40)], 4, 0),
        22_635.0,
    ));
    v.push((
        "SDL energy idle backend / 4",
        model::sdl_energy_per_server(&ctx(&["A", "B", "C", "D"], 4, &[0; 4], Strategy::Sdl)),
        3600.0 * oracle::sdl_share(&[("A", 0), ("B", 0), ("C", 0), ("D", 0)], 4, 0),
        127_467.0,
    ));

    let energy = |st: &ClusterState, x: &Vec<Vec<Vec<u32>>>, mu: &[bool]| {
        model::cluster_energy(st, x, mu, &common::params(Strategy::SmMr), &cal).unwrap()
    };
    let one = common::cluster(&["A"], vec![vec![1]], &[false]);
    let x1 = oracle::stay(&[vec![1]]);
    v.push((
        "one server, one A",
        energy(&one, &x1, &[true]).total,
        Scenario { classes: &["A"], x: &x1, mu: &[true], mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 }.energy(),
        444_348.0,
    ));
    let drain = common::cluster(&["A"], vec![vec![0, 2]], &[false, true]);
    let xd = vec![vec![vec![0, 0, 0], vec![2, 0, 0], vec![0, 0, 0]]];
    let sc = Scenario { classes: &["A"], x: &xd, mu: &[true, false], mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 };
    v.push((
        "draining source server",
        energy(&drain, &xd, &[true, false]).per_server[1].total,
        sc.server_energy(1),
        3053.803,
    ));
    let empty = common::cluster(&["A"], vec![vec![0]], &[false]);
    let x0 = oracle::stay(&[vec![0]]);
    v.push((
        "empty mandatory server",
        energy(&empty, &x0, &[true]).total,
        Scenario { classes: &["A"], x: &x0, mu: &[true], mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 }.energy(),
        432_000.0,
    ));
    let four = common::cluster(&["A"], vec![vec![3, 3, 2, 2]], &[false, false, false, false]);
    let x4 = oracle::stay(&[vec![3, 3, 2, 2]]);
    v.push((
        "four servers, 10 A",
        energy(&four, &x4, &[true; 4]).total,
        Scenario { classes: &["A"], x: &x4, mu: &[true; 4], mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 }.energy(),
        1_851_480.0,
    ));

    let exact_fit = fit_linear(&MeasurementSeries::new("sm-mr", vec![0.0, 10.0, 20.0], vec![0.0, 105.5, 211.0])).unwrap();
    v.push(("fit slope exact", exact_fit.slope, 10.55, 10.55));
    v.push(("fit intercept exact", exact_fit.intercept, 0.0, 0.0));
    let ols = fit_linear(&MeasurementSeries::new("ols", vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 4.0])).unwrap();
    // closed form: slope = Sxy / Sxx, intercept = mean_y - slope * mean_x
    let (mx, my) = (1.0, 7.0 / 3.0);
    let sxy = (0.0 - mx) * (1.0 - my) + (1.0 - mx) * (2.0 - my) + (2.0 - mx) * (4.0 - my);
    let sxx = 2.0;
    v.push(("fit slope ols", ols.slope, sxy / sxx, 1.5));
    v.push(("fit intercept ols", ols.intercept, my - sxy / sxx * mx, 0.833_333_333_333_333_3));
    v
}

fn criterion_2() -> Check {
    let values = derived_values();
    for (label, lib, oracle_value, frozen) in &values {
        close(&format!("{label} (library vs oracle)"), *lib, *oracle_value, 1e-9)?;
        close(&format!("{label} (oracle vs frozen)"), *oracle_value, *frozen, 1e-9)?;
    }

    // feasibility verdicts at the boundary
    let cal = CalibrationSet::shipped();
    let a = [XAppClass::reference("A").unwrap()];
    let p = common::params(Strategy::Sdl);
    ensure!(model::sdl_feasible(&a, &[60], &p, &cal).unwrap().feasible, "60 A must be SDL-feasible");
    ensure!(!model::sdl_feasible(&a, &[61], &p, &cal).unwrap().feasible, "61 A must be SDL-infeasible");

    // planning examples
    let st = common::cluster(&["A"], vec![vec![3, 3, 2, 2]], &[false, true, true, true]);
    let problem = build_problem(&st, &common::params(Strategy::SmMr), &cal).unwrap();
    let x4 = oracle::stay(&[vec![3, 3, 2, 2]]);
    close("no-op objective", problem.objective(&x4, &[true; 4]).unwrap(), 1_851_480.0, 1e-9)?;
    let consolidated = vec![vec![
        vec![3, 0, 0, 0, 0],
        vec![3, 0, 0, 0, 0],
        vec![2, 0, 0, 0, 0],
        vec![2, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 0],
    ]];
    let mu1 = [true, false, false, false];
    ensure!(validate_plan(&problem, &consolidated, &mu1).unwrap().valid, "consolidated plan must be valid");
    let cons = problem.objective(&consolidated, &mu1).unwrap();
    let cons_oracle = Scenario { classes: &["A"], x: &consolidated, mu: &mu1, mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 }.energy();
    close("consolidated objective", cons, cons_oracle, 1e-9)?;
    ensure!(cons < 1_851_480.0, "consolidation must be cheaper");

    let two = common::cluster(&["A"], vec![vec![0, 3]], &[false, true]);
    let problem = build_problem(&two, &common::params(Strategy::SmMr), &cal).unwrap();
    let out = solve_bruteforce(&problem, &SolveLimits::default()).unwrap();
    let plan = out.plan.ok_or("two-server instance has no plan")?;
    ensure!(plan.mu == vec![true, false], "shutdown must win, got {:?}", plan.mu);
    let xs = vec![vec![vec![0, 0, 0], vec![3, 0, 0], vec![0, 0, 0]]];
    let two_oracle = Scenario { classes: &["A"], x: &xs, mu: &[true, false], mode: Mode::Mr, rho_mb: 1.0, slot: 3600.0 }.energy();
    close("shutdown objective", out.report.objective.unwrap(), two_oracle, 1e-9)?;

    let undeploy = common::cluster(&["A"], vec![vec![3, 2, 1]], &[true, true, false]);
    let after = apply_undeployments(&undeploy, &[2], UndeployPolicy::MostLoadedFirst).unwrap();
    ensure!(after.initial_counts == vec![vec![1, 2, 1]], "undeploy gave {:?}", after.initial_counts);

    let mut staged = common::cluster(&["A"], vec![vec![0; 4]], &[false, true, true, true]);
    staged.pending_deploys = vec![10];
    let base = baseline_plan(&staged, &common::params(Strategy::SmMr), &cal).unwrap();
    ensure!(base.final_counts() == vec![vec![3, 3, 2, 2]], "baseline gave {:?}", base.final_counts());

    let mut spec = SweepSpec::new("A", (0..=70).collect());
    spec.dominant_share = 1.0;
    let rows = feasibility_sweep(&spec, &ScenarioParams::default(), &cal).unwrap();
    let caps: Vec<_> = max_feasible(&rows).into_iter().map(|b| (b.strategy, b.max_n)).collect();
    ensure!(
        caps == vec![(Strategy::Sdl, Some(60)), (Strategy::SmMr, Some(28)), (Strategy::SmMd, Some(52))],
        "feasibility caps {caps:?}"
    );
    Ok(format!("{} derived values agree at 1e-9", values.len()))
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a1);
    let cal = CalibrationSet::shipped();
    let mut infeasible = 0;
    for i in 0..100 {
        let strategy = Strategy::ALL[i % 3];
        let (st, p) = common::small_instance(&mut rng, strategy);
        let problem = build_problem(&st, &p, &cal).map_err(|e| e.to_string())?;
        let exact = solve_bruteforce(&problem, &SolveLimits::default()).map_err(|e| e.to_string())?;
        let bnb = solve_bnb(&problem, &SolveLimits::default()).map_err(|e| e.to_string())?;
        match (exact.report.objective, bnb.report.objective) {
            (Some(a), Some(b)) => close(&format!("instance {i} ({strategy})"), b, a, 1e-6)?,
            (None, None) => infeasible += 1,
            (a, b) => return Err(format!("instance {i} ({strategy}): oracle {a:?}, bnb {b:?}")),
        }
        for plan in [&exact.plan, &bnb.plan].into_iter().flatten() {
            let verdict = validate_plan(&problem, &plan.x, &plan.mu).unwrap();
            ensure!(verdict.valid, "instance {i}: plan violates {:?}", verdict.violations);
        }
        ensure!(
            bnb.plan.is_none() || bnb.report.status == SolveStatus::Optimal,
            "instance {i}: status {}",
            bnb.report.status
        );
    }
    Ok(format!("100 instances agree within 1e-6 ({infeasible} infeasible on both sides)"))
}

fn criterion_4() -> Check {
    let cal = CalibrationSet::shipped();
    let mut spec = SweepSpec::new("A", (0..=80).collect());
    spec.dominant_share = 1.0;
    spec.strategies = vec![Strategy::Sdl];
    let rows = feasibility_sweep(&spec, &ScenarioParams::default(), &cal).unwrap();
    let max_n = max_feasible(&rows)[0].max_n;
    ensure!(max_n == Some(60), "max feasible N = {max_n:?}");
    ensure!(rows[61].feasible == Some(false), "N = 61 reported feasible");

    for (n, feasible) in [(60, true), (61, false)] {
        let st = common::cluster(&["A"], vec![vec![n, 0]], &[false, true]);
        let problem = build_problem(&st, &common::params(Strategy::Sdl), &cal).unwrap();
        let out = solve_bnb(&problem, &SolveLimits::default()).unwrap();
        ensure!(out.plan.is_some() == feasible, "solver on N = {n}: {}", out.report.status);
    }

    // a defrag slope at the budget leaves only the empty configuration
    let mut heavy = cal.clone();
    heavy.set(
        Coefficient::DefragSlopeMs,
        sal_core::calibration::CoeffKey::any().strategy(Strategy::Sdl).class("A").rho(MB).nu(1.0),
        1000.0,
    );
    let rows = feasibility_sweep(&spec, &ScenarioParams::default(), &heavy).unwrap();
    ensure!(max_feasible(&rows)[0].max_n == Some(0), "sigma = 1 s must give max N = 0");
    Ok("max feasible N = 60, N = 61 infeasible".into())
}

fn criterion_5() -> Check {
    let cal = CalibrationSet::shipped();
    let st = common::cluster(&["A"], vec![vec![3, 3, 2, 2]], &[false, true, true, true]);
    let p = common::params(Strategy::SmMr);
    let problem = build_problem(&st, &p, &cal).unwrap();
    let exact = solve_bruteforce(&problem, &SolveLimits::default()).unwrap();
    let oracle_obj = exact.report.objective.ok_or("oracle found no plan")?;
    let baseline = baseline_plan(&st, &p, &cal).unwrap().energy;
    let oracle_gain = 1.0 - oracle_obj / baseline;

    let res = run_timeslot(&st, &p, &cal, &SlotConfig::default()).unwrap();
    let gain = res.energy_gain.ok_or("no energy gain")?;
    ensure!(res.activation_ratio == Some(0.25), "activation ratio {:?}", res.activation_ratio);
    ensure!(gain >= 0.60, "gain {gain}");
    close("gain vs oracle", gain, oracle_gain, 1e-6)?;
    let bound = 3.0 * 120.0 * 3600.0 / baseline;
    ensure!((0.0..bound).contains(&gain), "gain {gain} outside [0, {bound})");
    Ok(format!("activation 0.25, gain {gain:.6} (oracle {oracle_gain:.6}, bound {bound:.4})"))
}

fn criterion_6() -> Check {
    let cal = CalibrationSet::shipped();
    for (strategy, cap) in [(Strategy::SmMr, 28u32), (Strategy::SmMd, 52)] {
        for n in [cap, cap + 1] {
            let st = common::cluster(&["A"], vec![vec![n, 0]], &[false, true]);
            let problem = build_problem(&st, &common::params(strategy), &cal).unwrap();
            let x = vec![vec![vec![0, n, 0], vec![0, 0, 0], vec![0, 0, 0]]];
            let verdict = validate_plan(&problem, &x, &[true, true]).unwrap();
            let rejected = verdict.violates(Constraint::SmDowntime);
            ensure!(rejected == (n > cap), "{strategy} with {n} outgoing: rejected = {rejected}");
            if rejected {
                ensure!(
                    verdict.violations.iter().any(|v| v.to_string().starts_with("(20)")),
                    "violation not labelled (20): {:?}",
                    verdict.violations
                );
            }
        }
    }
    Ok("SM-MR cap 28, SM-MD cap 52, excess rejected as (20)".into())
}

fn criterion_7() -> Check {
    let cal = CalibrationSet::shipped();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen_range(0..10_000);
        let rho = [MB, 10 * MB, 100 * MB][rng.gen_range(0..3)];
        let d = model::sm_downtime(Strategy::SmMr, n, rho, &cal).unwrap();
        let m = model::migration_duration(Strategy::SmMr, n, rho, &cal).unwrap();
        ensure!(d == m, "SM-MR downtime {d} != duration {m} at n = {n}");
        ensure!(model::downtime(Strategy::Sdl, n, rho, &cal).unwrap() == 0.0, "SDL downtime non-zero");
    }

    for i in 0..30 {
        let (st, p) = common::small_instance(&mut rng, Strategy::ALL[i % 3]);
        let problem = build_problem(&st, &p, &cal).unwrap();
        let first = solve_bnb(&problem, &SolveLimits::default()).unwrap();
        let second = solve_bnb(&problem, &SolveLimits::default()).unwrap();
        let a = serde_json::to_string(&first.plan).unwrap();
        let b = serde_json::to_string(&second.plan).unwrap();
        ensure!(a == b, "instance {i}: plans differ between runs");
        if let Some(plan) = &first.plan {
            for k in 0..problem.class_count() {
                for s in 0..=problem.server_count() {
                    let row: u32 = plan.x[k][s].iter().sum();
                    ensure!(row == problem.n0(k, s), "instance {i}: conservation broken at ({k}, {s})");
                }
            }
        }
        let trace = &first.report.trace;
        for w in trace.windows(2) {
            ensure!(w[1].lower_bound >= w[0].lower_bound, "instance {i}: bound decreased");
            if let (Some(x), Some(y)) = (w[0].incumbent, w[1].incumbent) {
                ensure!(y <= x, "instance {i}: incumbent increased");
            }
        }
    }

    for n in [0u32, 1, 1_000, 1_000_000, u32::MAX / 4] {
        for strategy in Strategy::ALL {
            let classes = ["A", "B", "C", "D"];
            let c = ctx(&classes, 4, &[n; 4], strategy);
            let used = model::server_resources(&c, &[n; 4], true, true);
            ensure!(used.iter().all(|v| *v >= 0.0), "negative resources at N = {n}");
            ensure!(model::sdl_energy_per_server(&c) >= 0.0, "negative backend energy at N = {n}");
        }
    }
    Ok("identity, SDL zero downtime, conservation, determinism, trace monotonicity, clamping".into())
}

fn criterion_8() -> Check {
    let cal = CalibrationSet::shipped();
    let classes = ["A", "B", "C", "D"];
    // 120 xApps: 90 A and 10 each of B, C, D, spread evenly
    let st = common::cluster(
        &classes,
        vec![vec![23, 23, 22, 22], vec![3, 3, 2, 2], vec![2, 2, 3, 3], vec![2, 2, 3, 3]],
        &[false, true, true, true],
    );
    let p = common::params(Strategy::SmMd);
    let problem = build_problem(&st, &p, &cal).unwrap();
    let out = solve_bnb(&problem, &SolveLimits::default().with_time_limit(300.0)).unwrap();
    let plan = out.plan.ok_or(format!("no incumbent, status {}", out.report.status))?;
    let verdict = validate_plan(&problem, &plan.x, &plan.mu).unwrap();
    ensure!(verdict.valid, "incumbent violates {:?}", verdict.violations);
    let obj = out.report.objective.ok_or("no objective")?;
    close("objective vs plan energy", obj, plan.energy, 1e-9)?;
    let lb = out.report.lower_bound.ok_or("no lower bound")?;
    let gap = out.report.mip_gap.ok_or("no gap")?;
    ensure!(lb <= obj * (1.0 + 1e-9), "bound {lb} above incumbent {obj}");
    ensure!((0.0..=1.0).contains(&gap), "gap {gap}");
    match out.report.status {
        SolveStatus::Optimal => ensure!(gap == 0.0, "optimal with gap {gap}"),
        SolveStatus::TimeLimit => ensure!(out.report.runtime_s >= 300.0, "early time_limit"),
        other => return Err(format!("unexpected status {other}")),
    }
    Ok(format!(
        "status {}, gap {gap:.3e}, {} nodes, activation {}",
        out.report.status, out.report.nodes_explored, plan.activation_ratio
    ))
}

fn main() {
    let criteria: [(u8, &str, f64, fn() -> Check); 8] = [
        (1, "calibration fidelity", 1.0, criterion_1),
        (2, "formula values", 1.0, criterion_2),
        (3, "oracle equivalence", 60.0, criterion_3),
        (4, "SDL feasibility boundary", 1.0, criterion_4),
        (5, "consolidation energy gain", 10.0, criterion_5),
        (6, "SM downtime deadline", 1.0, criterion_6),
        (7, "property suites", 30.0, criterion_7),
        (8, "runtime and gap reporting", 300.0, criterion_8),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed().as_secs_f64();
        let result = match result {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2} s, budget {budget} s")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail} [{elapsed:.2} s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {why} [{elapsed:.2} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
