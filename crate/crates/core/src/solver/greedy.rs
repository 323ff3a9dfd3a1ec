//! Best-fit-decreasing consolidation heuristic.

use std::time::Instant;

use super::plan::{MigrationPlan, SolveOutcome, SolveReport, SolveStatus};
use super::validate::validate_plan;
use super::{Flows, SalProblem};
use crate::calibration::Metric;
use crate::error::Result;
use crate::model::types::Resource;

/// Tries every number of opened optional servers, most loaded first, and
/// keeps the cheapest valid plan. Heuristic plans carry no lower bound.
pub fn solve_greedy(problem: &SalProblem) -> Result<SolveOutcome> {
    let start = Instant::now();
    if let Some(reason) = problem.sdl_failure() {
        return Ok(SolveOutcome {
            plan: None,
            report: SolveReport::infeasible(reason, start.elapsed().as_secs_f64(), 0),
        });
    }
    let mut optional = problem.optional_servers();
    optional.sort_by_key(|&s| (std::cmp::Reverse(problem.state.hosted_on(s)), s));

    let mut best: Option<(f64, Flows, Vec<bool>)> = None;
    let mut attempts = 0;
    let mut last_failure = String::from("no attempt");
    for j in 0..=optional.len() {
        attempts += 1;
        let mut open: Vec<bool> = problem.state.servers.iter().map(|s| !s.optional).collect();
        for &s in &optional[..j] {
            open[s] = true;
        }
        let (x, mu) = match pack(problem, &open) {
            Ok(v) => v,
            Err(why) => {
                last_failure = why;
                continue;
            }
        };
        let verdict = validate_plan(problem, &x, &mu)?;
        if !verdict.valid {
            last_failure = verdict
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            continue;
        }
        let obj = problem.objective(&x, &mu)?;
        if best.as_ref().is_none_or(|(b, _, _)| obj < b - 1e-12 * b.abs()) {
            best = Some((obj, x, mu));
        }
    }

    let runtime_s = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((obj, x, mu)) => SolveOutcome {
            plan: Some(MigrationPlan::new(problem, x, mu)?),
            report: SolveReport {
                status: SolveStatus::GapReached,
                objective: Some(obj),
                lower_bound: None,
                mip_gap: None,
                runtime_s,
                nodes_explored: attempts,
                infeasibility: None,
                trace: Vec::new(),
            },
        },
        None => SolveOutcome {
            plan: None,
            report: SolveReport::infeasible(
                format!("greedy packing failed: {last_failure}"),
                runtime_s,
                attempts,
            ),
        },
    })
}

/// Keeps xApps on open servers and packs everything else onto them.
fn pack(problem: &SalProblem, open: &[bool]) -> std::result::Result<(Flows, Vec<bool>), String> {
    let ctx = &problem.ctx;
    let servers = problem.server_count();
    let classes = problem.class_count();
    let staging = problem.staging();
    let mut x = problem.empty_flows();
    let mut hosted = vec![vec![0u32; classes]; servers];
    let mut instantiated = vec![vec![0u32; classes]; servers];
    let mut outgoing = vec![vec![0u32; classes]; servers];

    for s in (0..servers).filter(|&s| open[s]) {
        for k in 0..classes {
            let n = problem.n0(k, s);
            x[k][s][s] = n;
            hosted[s][k] = n;
        }
    }

    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (ctx.load[a][Metric::Energy.index()], ctx.load[b][Metric::Energy.index()]);
        pb.total_cmp(&pa).then(a.cmp(&b))
    });
    let sources: Vec<usize> = (0..servers)
        .filter(|&s| !open[s])
        .chain(std::iter::once(staging))
        .collect();

    for &k in &order {
        for &src in &sources {
            for _ in 0..problem.n0(k, src) {
                if src != staging {
                    outgoing[src][k] += 1;
                    if ctx.server_downtime(&outgoing[src]) > problem.params.max_sm_downtime
                        && problem.strategy().is_stateful()
                    {
                        return Err(format!(
                            "server {} cannot be drained within the downtime budget",
                            problem.state.servers[src].id
                        ));
                    }
                    if ctx.window(&outgoing[src], &instantiated[src]) > ctx.slot_length {
                        return Err("migration window exceeds slot".into());
                    }
                }
                let mut pick: Option<(f64, usize)> = None;
                for t in (0..servers).filter(|&t| open[t]) {
                    hosted[t][k] += 1;
                    if src == staging {
                        instantiated[t][k] += 1;
                    }
                    let fits = fits(problem, t, &hosted[t])
                        && ctx.window(&outgoing[t], &instantiated[t]) <= ctx.slot_length;
                    let spare = problem.state.servers[t].capacity(Resource::Cpu)
                        - ctx.resources(&hosted[t], true, false)[Resource::Cpu.index()];
                    hosted[t][k] -= 1;
                    if src == staging {
                        instantiated[t][k] -= 1;
                    }
                    if fits && pick.is_none_or(|(best, _)| spare < best) {
                        pick = Some((spare, t));
                    }
                }
                let Some((_, t)) = pick else {
                    return Err(format!(
                        "no open server can take a class {} xApp",
                        problem.state.classes[k].id
                    ));
                };
                hosted[t][k] += 1;
                x[k][src][t] += 1;
                if src == staging {
                    instantiated[t][k] += 1;
                }
            }
        }
    }

    let mu = (0..servers)
        .map(|s| open[s] && (!problem.state.servers[s].optional || hosted[s].iter().any(|&n| n > 0)))
        .collect();
    Ok((x, mu))
}

fn fits(problem: &SalProblem, s: usize, hosted: &[u32]) -> bool {
    let used = problem.ctx.resources(hosted, true, false);
    Resource::ALL
        .iter()
        .all(|&r| used[r.index()] <= problem.state.servers[s].capacity(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::CalibrationSet;
    use crate::model::types::{ClusterState, ScenarioParams, ServerSpec, XAppClass};
    use crate::solver::build_problem;

    fn cluster(counts: &[u32], class: &str) -> ClusterState {
        let servers = (0..counts.len())
            .map(|i| ServerSpec::testbed(format!("s{i}"), i > 0))
            .collect();
        let mut st = ClusterState::new(vec![XAppClass::reference(class).unwrap()], servers);
        st.initial_counts = vec![counts.to_vec()];
        st
    }

    #[test]
    fn consolidates_light_load() {
        let p = build_problem(&cluster(&[3, 3, 2, 2], "A"), &ScenarioParams::default(), &CalibrationSet::shipped())
            .unwrap();
        let out = solve_greedy(&p).unwrap();
        let plan = out.plan.unwrap();
        assert_eq!(plan.activation_ratio, 0.25);
        assert!(out.report.lower_bound.is_none());
    }

    #[test]
    fn overload_is_infeasible() {
        let mut st = cluster(&[0, 0], "B");
        st.pending_deploys = vec![100];
        let p = build_problem(&st, &ScenarioParams::default(), &CalibrationSet::shipped()).unwrap();
        let out = solve_greedy(&p).unwrap();
        assert_eq!(out.report.status, SolveStatus::Infeasible);
        assert!(out.plan.is_none());
    }

    #[test]
    fn staged_xapps_are_placed() {
        let mut st = cluster(&[1, 0], "A");
        st.pending_deploys = vec![4];
        let p = build_problem(&st, &ScenarioParams::default(), &CalibrationSet::shipped()).unwrap();
        let plan = solve_greedy(&p).unwrap().plan.unwrap();
        assert_eq!(plan.final_counts(), vec![vec![5, 0]]);
        assert_eq!(plan.mu, vec![true, false]);
    }
}
