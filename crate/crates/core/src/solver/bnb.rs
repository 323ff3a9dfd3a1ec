//! Best-first branch-and-bound over the linear relaxation.
//!
//! Branching order: activations first, then flows, then gates. Nodes whose
//! relaxation is integral but whose product terms are inexact are split on
//! the window or power range of the worst server, which makes the current
//! point exact in both children.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::greedy::solve_greedy;
use super::plan::{MigrationPlan, SolveOutcome, SolveReport, SolveStatus, TracePoint};
use super::realize::{realize_class, ClassMoves};
use super::relaxation::{Bounds, Drop, Kind, LpSolution, Relaxation, ServerVar};
use super::validate::Constraint;
use super::{Flows, SalProblem, SolveLimits};
use crate::calibration::Metric;
use crate::error::Result;

/// Relative tolerance under which a node cannot improve the incumbent.
const PRUNE_REL: f64 = 1e-9;
const INT_TOL: f64 = 1e-6;

struct Node {
    bounds: Bounds,
    lp: LpSolution,
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Reversed so that the max-heap pops the smallest bound, then the
    /// oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    objective: f64,
    x: Flows,
    mu: Vec<bool>,
}

struct Search<'a> {
    relax: Relaxation<'a>,
    incumbent: Option<Incumbent>,
    heap: BinaryHeap<Node>,
    seq: u64,
    trace: Vec<TracePoint>,
    nodes: u64,
    lower_bound: f64,
}

impl<'a> Search<'a> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some(inc) => inc.objective - PRUNE_REL * inc.objective.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn record(&mut self) {
        let incumbent = self.incumbent.as_ref().map(|i| i.objective);
        let lb = incumbent.map_or(self.lower_bound, |i| self.lower_bound.min(i));
        let point = TracePoint {
            nodes: self.nodes,
            incumbent,
            lower_bound: lb,
        };
        if self.trace.last().is_none_or(|last| {
            last.incumbent != point.incumbent || last.lower_bound != point.lower_bound
        }) {
            self.trace.push(point);
        }
    }

    fn offer(&mut self, objective: f64, x: Flows, mu: Vec<bool>) {
        let better = self
            .incumbent
            .as_ref()
            .is_none_or(|inc| objective < inc.objective - 1e-12 * inc.objective.abs());
        if better {
            self.incumbent = Some(Incumbent { objective, x, mu });
            self.record();
        }
    }

    /// Propagates, solves and queues a child node unless it is pruned.
    fn push(&mut self, mut bounds: Bounds, parent_bound: f64) {
        if !self.relax.propagate(&mut bounds) {
            return;
        }
        let Some(lp) = self.relax.solve(&bounds, Drop::default()) else {
            return;
        };
        let bound = lp.objective.max(parent_bound);
        if bound >= self.cutoff() {
            return;
        }
        self.seq += 1;
        self.heap.push(Node {
            bounds,
            lp,
            bound,
            seq: self.seq,
        });
    }

    fn branch_on_integer(&mut self, node: &Node) -> bool {
        for group in self.relax.layout.integer_groups() {
            let mut pick: Option<(f64, usize)> = None;
            for &j in &group {
                let v = node.lp.values[j];
                let frac = (v - v.floor()).min(v.ceil() - v);
                if frac > INT_TOL && pick.is_none_or(|(best, _)| frac > best + 1e-12) {
                    pick = Some((frac, j));
                }
            }
            if let Some((_, j)) = pick {
                let v = node.lp.values[j];
                let mut down = node.bounds.clone();
                down.hi[j] = v.floor();
                let mut up = node.bounds.clone();
                up.lo[j] = v.ceil();
                self.push(down, node.bound);
                self.push(up, node.bound);
                return true;
            }
        }
        false
    }

    /// Handles a node whose integer variables are all integral.
    fn integral(&mut self, node: &Node) -> Result<()> {
        let p = self.relax.p;
        let l = self.relax.layout;
        let ctx = &p.ctx;
        let val = |j: usize| node.lp.values[j].round().max(0.0) as u32;

        let mu: Vec<bool> = (0..l.servers).map(|s| val(l.server(ServerVar::Mu, s)) == 1).collect();
        let mut x = p.empty_flows();
        let mut realized = true;
        for (k, xk) in x.iter_mut().enumerate() {
            let n0: Vec<u32> = (0..l.servers).map(|s| p.n0(k, s)).collect();
            let out: Vec<u32> = (0..l.servers).map(|s| val(l.pair(Kind::Out, k, s))).collect();
            let inn: Vec<u32> = (0..l.servers).map(|s| val(l.pair(Kind::In, k, s))).collect();
            let new: Vec<u32> = (0..l.servers).map(|s| val(l.pair(Kind::New, k, s))).collect();
            match realize_class(&ClassMoves { n0: &n0, out: &out, inn: &inn, new: &new }) {
                Some(m) => *xk = m,
                None => realized = false,
            }
        }
        let exact = if realized {
            p.feasible_objective(&x, &mu)?
        } else {
            None
        };
        if let Some(obj) = exact {
            self.offer(obj, x, mu.clone());
            if obj <= node.bound + PRUNE_REL * obj.abs().max(1.0) {
                return Ok(());
            }
        }

        // exact window and power of every server at this point
        let q_e = ctx.idle[Metric::Energy.index()];
        let mut worst: Option<(f64, usize, f64, f64)> = None;
        for s in 0..l.servers {
            let mut w = 0.0;
            let mut pw = 0.0;
            for k in 0..l.classes {
                let (o, i, m) = (
                    val(l.pair(Kind::Out, k, s)),
                    val(l.pair(Kind::New, k, s)),
                    val(l.pair(Kind::In, k, s)),
                );
                w += ctx.duration.eval_count(o) + ctx.instantiation.eval_count(i);
                let h = p.n0(k, s) + i + m - o.min(p.n0(k, s));
                pw += ctx.load[k][Metric::Energy.index()] * h as f64;
            }
            let mu_v = if mu[s] { 1.0 } else { 0.0 };
            let err = q_e * (node.lp.values[l.server(ServerVar::WindowMu, s)] - w * mu_v)
                + (node.lp.values[l.server(ServerVar::WindowPower, s)] - w * pw);
            if worst.is_none_or(|(e, ..)| err > e + 1e-12) {
                worst = Some((err, s, w, pw));
            }
        }
        let Some((err, s, w, pw)) = worst else {
            return Ok(());
        };
        if err <= 1e-9 * node.bound.abs().max(1.0) && exact.is_some() {
            return Ok(());
        }

        let mu_j = l.server(ServerVar::Mu, s);
        if node.bounds.lo[mu_j] < node.bounds.hi[mu_j] {
            let mut off = node.bounds.clone();
            off.hi[mu_j] = 0.0;
            let mut on = node.bounds.clone();
            on.lo[mu_j] = 1.0;
            self.push(off, node.bound);
            self.push(on, node.bound);
            return Ok(());
        }
        for (var, at) in [(ServerVar::Window, w), (ServerVar::Power, pw)] {
            let j = l.server(var, s);
            let (lo, hi) = (node.bounds.lo[j], node.bounds.hi[j]);
            let margin = 1e-9 * hi.abs().max(1.0);
            if at > lo + margin && at < hi - margin {
                let mut left = node.bounds.clone();
                left.hi[j] = at;
                let mut right = node.bounds.clone();
                right.lo[j] = at;
                self.push(left, node.bound);
                self.push(right, node.bound);
                return Ok(());
            }
        }
        Ok(())
    }

    fn diagnose(&self) -> String {
        let mut root = self.relax.root_bounds();
        if !self.relax.propagate(&mut root) {
            return "variable bounds are contradictory".into();
        }
        if self.relax.solve(&root, Drop::default()).is_some() {
            return "the relaxation is feasible but no integral plan satisfies every constraint".into();
        }
        let candidates = [
            (
                Drop {
                    capacity: true,
                    ..Drop::default()
                },
                Constraint::Capacity,
            ),
            (
                Drop {
                    downtime: true,
                    ..Drop::default()
                },
                Constraint::SmDowntime,
            ),
            (
                Drop {
                    hosts_load: true,
                    ..Drop::default()
                },
                Constraint::ActiveHostsLoad,
            ),
        ];
        let culprits: Vec<String> = candidates
            .iter()
            .filter(|(drop, c)| self.relax.p.has_constraint(*c) && self.relax.solve(&root, *drop).is_some())
            .map(|(_, c)| c.to_string())
            .collect();
        if culprits.is_empty() {
            "infeasible under the combined constraints".into()
        } else {
            format!("infeasible: relaxing {} alone restores feasibility", culprits.join(" or "))
        }
    }
}

/// Solves `problem` exactly, or up to the limits.
pub fn solve_bnb(problem: &SalProblem, limits: &SolveLimits) -> Result<SolveOutcome> {
    let start = Instant::now();
    if let Some(reason) = problem.sdl_failure() {
        return Ok(SolveOutcome {
            plan: None,
            report: SolveReport::infeasible(reason, start.elapsed().as_secs_f64(), 0),
        });
    }
    let mut search = Search {
        relax: Relaxation::new(problem),
        incumbent: None,
        heap: BinaryHeap::new(),
        seq: 0,
        trace: Vec::new(),
        nodes: 0,
        lower_bound: f64::NEG_INFINITY,
    };

    let warm = solve_greedy(problem)?;
    if let (Some(plan), Some(obj)) = (warm.plan, warm.report.objective) {
        search.offer(obj, plan.x, plan.mu);
    }

    let root = search.relax.root_bounds();
    search.push(root, f64::NEG_INFINITY);
    if let Some(top) = search.heap.peek() {
        search.lower_bound = top.bound;
        search.record();
    }

    let budget = limits.time_budget();
    let mut status = None;
    while let Some(top) = search.heap.peek() {
        if top.bound >= search.cutoff() {
            search.heap.clear();
            break;
        }
        if top.bound > search.lower_bound {
            search.lower_bound = top.bound;
            search.record();
        }
        if let Some(inc) = &search.incumbent {
            if limits.gap_target > 0.0
                && SolveReport::gap(inc.objective, search.lower_bound) <= limits.gap_target
            {
                status = Some(SolveStatus::GapReached);
                break;
            }
        }
        if start.elapsed() >= budget || limits.node_limit.is_some_and(|n| search.nodes >= n) {
            status = Some(SolveStatus::TimeLimit);
            break;
        }
        let node = search.heap.pop().expect("peeked");
        search.nodes += 1;
        if !search.branch_on_integer(&node) {
            search.integral(&node)?;
        }
    }

    let runtime_s = start.elapsed().as_secs_f64();
    let nodes = search.nodes;
    let status = match status {
        Some(s) => s,
        None if search.incumbent.is_some() => {
            if let Some(inc) = &search.incumbent {
                search.lower_bound = inc.objective;
            }
            search.record();
            SolveStatus::Optimal
        }
        None => {
            let reason = search.diagnose();
            let mut report = SolveReport::infeasible(reason, runtime_s, nodes);
            report.trace = search.trace;
            return Ok(SolveOutcome { plan: None, report });
        }
    };

    let (plan, objective) = match search.incumbent.take() {
        Some(inc) => (Some(MigrationPlan::new(problem, inc.x, inc.mu)?), Some(inc.objective)),
        None => (None, None),
    };
    let lower_bound = match objective {
        Some(obj) => search.lower_bound.min(obj),
        None => search.lower_bound,
    };
    let lower_bound = lower_bound.is_finite().then_some(lower_bound);
    let mip_gap = match (objective, lower_bound) {
        (Some(obj), Some(lb)) => Some(SolveReport::gap(obj, lb)),
        _ => None,
    };
    Ok(SolveOutcome {
        plan,
        report: SolveReport {
            status,
            objective,
            lower_bound,
            mip_gap,
            runtime_s,
            nodes_explored: nodes,
            infeasibility: None,
            trace: search.trace,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::CalibrationSet;
    use crate::model::types::{ClusterState, ScenarioParams, ServerSpec, Strategy, XAppClass};
    use crate::solver::{build_problem, solve_bruteforce};

    fn problem(counts: &[u32], staged: u32, strategy: Strategy) -> SalProblem {
        let servers = (0..counts.len())
            .map(|i| ServerSpec::testbed(format!("s{i}"), i > 0))
            .collect();
        let mut st = ClusterState::new(vec![XAppClass::reference("A").unwrap()], servers);
        st.initial_counts = vec![counts.to_vec()];
        st.pending_deploys = vec![staged];
        let params = ScenarioParams {
            strategy,
            ..ScenarioParams::default()
        };
        build_problem(&st, &params, &CalibrationSet::shipped()).unwrap()
    }

    #[test]
    fn matches_oracle_on_small_instances() {
        for strategy in Strategy::ALL {
            for (counts, staged) in [(vec![0, 3], 0), (vec![2, 1, 1], 2), (vec![1, 0, 2], 1)] {
                let p = problem(&counts, staged, strategy);
                let exact = solve_bruteforce(&p, &SolveLimits::default()).unwrap();
                let bnb = solve_bnb(&p, &SolveLimits::default()).unwrap();
                let (a, b) = (exact.report.objective.unwrap(), bnb.report.objective.unwrap());
                assert!((a - b).abs() <= 1e-6 * a, "{strategy} {counts:?}: {a} vs {b}");
                assert_eq!(bnb.report.status, SolveStatus::Optimal);
                assert_eq!(bnb.report.mip_gap, Some(0.0));
            }
        }
    }

    #[test]
    fn sdl_overload() {
        let p = problem(&[61], 0, Strategy::Sdl);
        let out = solve_bnb(&p, &SolveLimits::default()).unwrap();
        assert_eq!(out.report.status, SolveStatus::Infeasible);
        assert!(out.report.infeasibility.unwrap().contains("(21)"));
    }

    #[test]
    fn trace_is_monotone() {
        let p = problem(&[2, 2, 1], 1, Strategy::SmMd);
        let out = solve_bnb(&p, &SolveLimits::default()).unwrap();
        let t = &out.report.trace;
        assert!(!t.is_empty());
        for pair in t.windows(2) {
            assert!(pair[1].lower_bound >= pair[0].lower_bound);
            if let (Some(a), Some(b)) = (pair[0].incumbent, pair[1].incumbent) {
                assert!(b <= a);
            }
        }
    }
}
