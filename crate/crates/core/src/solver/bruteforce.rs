//! Exhaustive enumeration of activation vectors and flow tensors.

use std::time::Instant;

use super::plan::{MigrationPlan, SolveOutcome, SolveReport, SolveStatus};
use super::validate::validate_plan;
use super::{Flows, SalProblem, SolveLimits};
use crate::error::{Error, Result};

/// Number of plans the exhaustive search would visit: activation vectors
/// times the ways to split every non-empty row of `n0` over the physical
/// servers.
pub fn search_space_estimate(problem: &SalProblem) -> f64 {
    let servers = problem.server_count();
    let mut estimate = 2f64.powi(problem.optional_servers().len() as i32);
    for k in 0..problem.class_count() {
        for s in 0..=servers {
            let n = problem.n0(k, s) as u64;
            if n > 0 {
                estimate *= binomial(n + servers as u64 - 1, servers as u64 - 1);
            }
        }
    }
    estimate
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All ways to write `n` as an ordered sum over `slots` parts, in
/// lexicographically increasing order.
fn compositions(n: u32, slots: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=n {
            prefix.push(v);
            rec(n - v, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if slots > 0 {
        rec(n, slots, &mut Vec::with_capacity(slots), &mut out);
    }
    out
}

/// Enumerates every plan and keeps the best feasible one. Among equal
/// objectives the lexicographically smallest `(mu, x)` wins.
pub fn solve_bruteforce(problem: &SalProblem, limits: &SolveLimits) -> Result<SolveOutcome> {
    let start = Instant::now();
    let estimate = search_space_estimate(problem);
    if estimate > limits.bruteforce_cap as f64 {
        return Err(Error::SearchSpaceTooLarge {
            estimate,
            cap: limits.bruteforce_cap,
        });
    }
    if let Some(reason) = problem.sdl_failure() {
        return Ok(SolveOutcome {
            plan: None,
            report: SolveReport::infeasible(reason, start.elapsed().as_secs_f64(), 0),
        });
    }

    let servers = problem.server_count();
    let classes = problem.class_count();
    let optional = problem.optional_servers();
    let rows: Vec<(usize, usize, u32)> = (0..classes)
        .flat_map(|k| (0..=servers).map(move |s| (k, s)))
        .map(|(k, s)| (k, s, problem.n0(k, s)))
        .filter(|&(_, _, n)| n > 0)
        .collect();

    let mut best: Option<(f64, Flows, Vec<bool>)> = None;
    let mut fewest_violations: Option<(usize, String)> = None;
    let mut visited = 0u64;

    for mask in 0..(1u64 << optional.len()) {
        let mut mu = vec![true; servers];
        for (i, &s) in optional.iter().enumerate() {
            // first optional server is the most significant bit
            mu[s] = mask >> (optional.len() - 1 - i) & 1 == 1;
        }
        let active: Vec<usize> = (0..servers).filter(|&s| mu[s]).collect();
        let choices: Vec<Vec<Vec<u32>>> = rows
            .iter()
            .map(|&(_, _, n)| compositions(n, active.len()))
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }

        let mut idx = vec![0usize; rows.len()];
        let mut x = problem.empty_flows();
        loop {
            for (r, &(k, s, _)) in rows.iter().enumerate() {
                let row = &mut x[k][s];
                row.iter_mut().for_each(|v| *v = 0);
                for (j, &t) in active.iter().enumerate() {
                    row[t] = choices[r][idx[r]][j];
                }
            }
            visited += 1;
            let verdict = validate_plan(problem, &x, &mu)?;
            if verdict.valid {
                let obj = problem.objective(&x, &mu)?;
                let better = match &best {
                    None => true,
                    Some((b, _, _)) => obj < b - 1e-12 * b.abs(),
                };
                if better {
                    best = Some((obj, x.clone(), mu.clone()));
                }
            } else if fewest_violations
                .as_ref()
                .is_none_or(|(n, _)| verdict.violations.len() < *n)
            {
                let text = verdict
                    .violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                fewest_violations = Some((verdict.violations.len(), text));
            }

            // odometer, last row fastest
            let mut exhausted = true;
            for r in (0..rows.len()).rev() {
                idx[r] += 1;
                if idx[r] < choices[r].len() {
                    exhausted = false;
                    break;
                }
                idx[r] = 0;
            }
            if exhausted {
                break;
            }
        }
    }

    let runtime_s = start.elapsed().as_secs_f64();
    match best {
        Some((obj, x, mu)) => {
            let plan = MigrationPlan::new(problem, x, mu)?;
            Ok(SolveOutcome {
                plan: Some(plan),
                report: SolveReport {
                    status: SolveStatus::Optimal,
                    objective: Some(obj),
                    lower_bound: Some(obj),
                    mip_gap: Some(0.0),
                    runtime_s,
                    nodes_explored: visited,
                    infeasibility: None,
                    trace: Vec::new(),
                },
            })
        }
        None => {
            let reason = fewest_violations
                .map(|(_, t)| format!("no feasible plan; closest candidate violates {t}"))
                .unwrap_or_else(|| "no feasible plan".into());
            Ok(SolveOutcome {
                plan: None,
                report: SolveReport::infeasible(reason, runtime_s, visited),
            })
        }
    }
}
