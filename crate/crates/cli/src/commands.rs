//! Subcommand implementations. Each returns the process exit code; `Err`
//! means a usage or parse error (exit 1).

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use sal_core::calibration::{fit_linear, MeasurementSeries};
use sal_core::orchestrator::{apply_undeployments, energy_sweep, feasibility_sweep, run_timeslot, SlotConfig, SweepRow};
use sal_core::solver::{build_problem, validate_plan};
use sal_core::{CalibrationSet, Error, SolveStatus, XAppClass};

use crate::args::{FitArgs, GenerateArgs, PlanArgs, SolveFlags, SweepArgs, ValidateArgs};
use crate::files::{check_limits, read_json, ClassEntry, ParamsEntry, Scenario, ScenarioFile, ServerEntry, Sweep, SweepFile};
use crate::output::{self, Combined, PlanArtifact, ReportArtifact, Units};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;

fn load_calibration(path: Option<&Path>) -> Result<CalibrationSet> {
    match path {
        None => Ok(CalibrationSet::shipped()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            CalibrationSet::from_json(&text).with_context(|| format!("cannot load calibration {}", p.display()))
        }
    }
}

fn apply_flags(config: &mut SlotConfig, flags: &SolveFlags) -> Result<()> {
    if let Some(s) = flags.solver {
        config.solver = s;
    }
    if let Some(t) = flags.time_limit {
        config.limits.time_limit = t;
    }
    if let Some(g) = flags.gap {
        config.limits.gap_target = g;
    }
    check_limits(&config.limits)
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    let file: ScenarioFile = read_json(path)?;
    file.resolve().with_context(|| format!("invalid scenario {}", path.display()))
}

fn write_to(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            write_to(dir, name, contents)?;
        }
        None => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

pub fn plan(args: &PlanArgs) -> Result<u8> {
    let mut sc = load_scenario(&args.scenario)?;
    if let Some(s) = args.flags.strategy {
        sc.params.strategy = s;
    }
    apply_flags(&mut sc.config, &args.flags)?;
    let cal = load_calibration(args.flags.calibration.as_deref())?;
    let res = run_timeslot(&sc.state, &sc.params, &cal, &sc.config)?;

    let report = ReportArtifact {
        units: Units::default(),
        solver: sc.config.solver,
        strategy: sc.params.strategy,
        status: res.report.status,
        objective: res.report.objective,
        lower_bound: res.report.lower_bound,
        mip_gap: res.report.mip_gap,
        nodes_explored: res.report.nodes_explored,
        runtime_s: args.flags.timing.then_some(res.report.runtime_s),
        infeasibility: res.report.infeasibility.clone(),
        baseline_energy: res.baseline_energy,
        baseline_issue: res.baseline_issue.clone(),
        energy_gain: res.energy_gain,
        activation_ratio: res.activation_ratio,
    };
    let plan = res.plan.clone().map(|plan| PlanArtifact {
        units: Units::default(),
        plan,
    });
    match &args.out {
        Some(dir) => {
            if let Some(p) = &plan {
                write_to(dir, "plan.json", &output::to_json(p)?)?;
            }
            write_to(dir, "report.json", &output::to_json(&report)?)?;
        }
        None => emit(None, "", &output::to_json(&Combined { plan: plan.clone(), report: report.clone() })?)?,
    }

    eprintln!("status: {}", res.report.status);
    if let Some(why) = &res.report.infeasibility {
        eprintln!("infeasible: {why}");
    }
    Ok(match (res.report.status, &plan) {
        (SolveStatus::Optimal | SolveStatus::GapReached, _) => EXIT_OK,
        (SolveStatus::TimeLimit, Some(_)) => EXIT_OK,
        _ => EXIT_INFEASIBLE,
    })
}

pub fn validate(args: &ValidateArgs) -> Result<u8> {
    let mut sc = load_scenario(&args.scenario)?;
    if let Some(s) = args.strategy {
        sc.params.strategy = s;
    }
    let text = std::fs::read_to_string(&args.plan).with_context(|| format!("cannot read {}", args.plan.display()))?;
    let input = output::parse_plan(&text).with_context(|| format!("cannot parse {}", args.plan.display()))?;
    let cal = load_calibration(args.calibration.as_deref())?;
    let prepared = apply_undeployments(&sc.state, &sc.state.pending_undeploys, sc.config.undeploy_policy)?;
    let problem = build_problem(&prepared, &sc.params, &cal)?;
    let verdict = validate_plan(&problem, &input.x, &input.mu)
        .with_context(|| format!("plan {} does not fit the scenario", args.plan.display()))?;
    let mut stdout = std::io::stdout().lock();
    for v in &verdict.violations {
        writeln!(stdout, "violated {v}")?;
    }
    if verdict.valid {
        writeln!(stdout, "valid")?;
        Ok(EXIT_OK)
    } else {
        writeln!(stdout, "invalid: {} violation(s)", verdict.violations.len())?;
        Ok(EXIT_INVALID)
    }
}

fn load_sweep(args: &SweepArgs) -> Result<(Sweep, CalibrationSet)> {
    let file: SweepFile = read_json(&args.spec)?;
    let mut sw = file.resolve().with_context(|| format!("invalid sweep {}", args.spec.display()))?;
    if let Some(s) = args.flags.strategy {
        sw.spec.strategies = vec![s];
    }
    apply_flags(&mut sw.config, &args.flags)?;
    let cal = load_calibration(args.flags.calibration.as_deref())?;
    Ok((sw, cal))
}

fn report_rows(rows: &[SweepRow], args: &SweepArgs, name: &str) -> Result<u8> {
    for r in rows.iter().filter(|r| r.feasible.is_none()) {
        if let Some(d) = &r.diagnostic {
            eprintln!(
                "warning: {} class {} rho {} MB nu {} s N {}: {d}",
                r.strategy, r.class, r.rho_mb, r.nu_s, r.n_total
            );
        }
    }
    let mut buf = Vec::new();
    output::write_csv(rows, args.flags.timing, &mut buf)?;
    emit(args.out.as_deref(), name, std::str::from_utf8(&buf)?)?;
    Ok(EXIT_OK)
}

pub fn feasibility(args: &SweepArgs) -> Result<u8> {
    let (sw, cal) = load_sweep(args)?;
    let rows = feasibility_sweep(&sw.spec, &sw.template, &cal)?;
    report_rows(&rows, args, "feasibility.csv")
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let (sw, cal) = load_sweep(args)?;
    let rows = energy_sweep(&sw.spec, &sw.template, &cal, &sw.config)?;
    report_rows(&rows, args, "sweep.csv")
}

#[derive(Debug, Deserialize)]
struct Measurement {
    predictor: f64,
    response: f64,
}

fn read_series(path: &Path, label: &str) -> Result<MeasurementSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut series = MeasurementSeries::new(label, Vec::new(), Vec::new());
    for (i, row) in reader.deserialize::<Measurement>().enumerate() {
        let m = row.with_context(|| format!("{}: bad record {}", path.display(), i + 1))?;
        series.predictor.push(m.predictor);
        series.response.push(m.response);
    }
    Ok(series)
}

pub fn fit(args: &FitArgs) -> Result<u8> {
    let series = read_series(&args.measurements, &args.label)?;
    match fit_linear(&series) {
        Ok(f) => {
            let fragment = serde_json::json!({
                "label": args.label,
                "delta": f.slope,
                "b": f.intercept,
                "rms_residual": f.rms,
                "samples": series.predictor.len(),
            });
            print!("{}", output::to_json(&fragment)?);
            Ok(EXIT_OK)
        }
        Err(e @ Error::DegenerateFit(_)) => {
            eprintln!("error: {e}");
            Ok(EXIT_DEGENERATE)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn generate(args: &GenerateArgs) -> Result<u8> {
    anyhow::ensure!(args.servers > 0, "--servers must be > 0");
    let classes: Vec<XAppClass> = args
        .classes
        .iter()
        .map(|id| XAppClass::reference(id).with_context(|| format!("unknown reference class `{id}`")))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (k, s) = (classes.len(), args.servers);
    let mut placement = vec![vec![0u32; s]; k];
    for _ in 0..args.xapps {
        placement[rng.gen_range(0..k)][rng.gen_range(0..s)] += 1;
    }
    let mut deploy = vec![0u32; k];
    for _ in 0..args.staged {
        deploy[rng.gen_range(0..k)] += 1;
    }
    let file = ScenarioFile {
        classes: classes.into_iter().map(|c| ClassEntry::Reference(c.id)).collect(),
        servers: (0..s)
            .map(|i| ServerEntry {
                id: format!("server-{i}"),
                optional: i > 0,
                cpu_cap: None,
                mem_cap: None,
                disk_cap: None,
            })
            .collect(),
        placement: Some(placement),
        active: None,
        deploy: Some(deploy),
        undeploy: None,
        params: ParamsEntry {
            strategy: args.strategy,
            ..ParamsEntry::default()
        },
        limits: Default::default(),
        solver: None,
        undeploy_policy: Default::default(),
    };
    emit(args.out.as_deref(), "scenario.json", &output::to_json(&file)?)?;
    Ok(EXIT_OK)
}

pub fn calibration() -> Result<u8> {
    println!("{}", CalibrationSet::shipped().to_json());
    Ok(EXIT_OK)
}
