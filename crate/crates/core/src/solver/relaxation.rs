//! Linear relaxation of the aggregated problem.
//!
//! Per (class, server) the relaxation works with `o` (xApps leaving), `i`
//! (new xApps started), `m` (xApps arriving from other servers) and the
//! gates `g = [o > 0]`, `z = [i > 0]`. Per server it adds the activation
//! `mu`, the participation `y = [any o > 0]`, `t = y AND mu`, the window
//! length `W`, the final per-xApp power `P`, and two product terms
//! `v = W * mu` and `w = W * P` bounded from above by McCormick envelopes.
//! Any integral point whose products are exact has the same objective as
//! the plan it encodes, so the relaxation bounds every plan in the node.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::SalProblem;
use crate::calibration::Metric;
use crate::model::types::Resource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Out,
    New,
    In,
    OutGate,
    NewGate,
}

const PER_PAIR: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ServerVar {
    Mu,
    Participates,
    EngineOn,
    Window,
    Power,
    WindowMu,
    WindowPower,
}

const PER_SERVER: usize = 7;

/// Index arithmetic over the relaxation variables.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub classes: usize,
    pub servers: usize,
}

impl Layout {
    pub fn new(p: &SalProblem) -> Self {
        Self {
            classes: p.class_count(),
            servers: p.server_count(),
        }
    }

    pub fn len(&self) -> usize {
        PER_PAIR * self.classes * self.servers + PER_SERVER * self.servers
    }

    pub fn pair(&self, kind: Kind, k: usize, s: usize) -> usize {
        let block = match kind {
            Kind::Out => 0,
            Kind::New => 1,
            Kind::In => 2,
            Kind::OutGate => 3,
            Kind::NewGate => 4,
        };
        (block * self.classes + k) * self.servers + s
    }

    pub fn server(&self, var: ServerVar, s: usize) -> usize {
        let block = match var {
            ServerVar::Mu => 0,
            ServerVar::Participates => 1,
            ServerVar::EngineOn => 2,
            ServerVar::Window => 3,
            ServerVar::Power => 4,
            ServerVar::WindowMu => 5,
            ServerVar::WindowPower => 6,
        };
        PER_PAIR * self.classes * self.servers + block * self.servers + s
    }

    /// Variables that must take integer values, in branching priority order
    /// within each group.
    pub fn integer_groups(&self) -> [Vec<usize>; 3] {
        let mu = (0..self.servers).map(|s| self.server(ServerVar::Mu, s)).collect();
        let mut flows = Vec::new();
        let mut gates = Vec::new();
        for k in 0..self.classes {
            for s in 0..self.servers {
                for kind in [Kind::Out, Kind::New, Kind::In] {
                    flows.push(self.pair(kind, k, s));
                }
                gates.push(self.pair(Kind::OutGate, k, s));
                gates.push(self.pair(Kind::NewGate, k, s));
            }
        }
        [mu, flows, gates]
    }
}

/// Variable bounds of a branch-and-bound node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Constraint families that can be dropped to diagnose infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Drop {
    pub capacity: bool,
    pub downtime: bool,
    pub hosts_load: bool,
}

pub(crate) struct Relaxation<'a> {
    pub p: &'a SalProblem,
    pub layout: Layout,
    /// Objective constant: steady-state load of every xApp for the slot.
    pub constant: f64,
}

pub(crate) struct LpSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

impl<'a> Relaxation<'a> {
    pub fn new(p: &'a SalProblem) -> Self {
        let ctx = &p.ctx;
        let constant: f64 = ctx
            .totals
            .iter()
            .enumerate()
            .map(|(k, &n)| ctx.slot_length * ctx.load[k][Metric::Energy.index()] * n as f64)
            .sum();
        Self {
            p,
            layout: Layout::new(p),
            constant,
        }
    }

    fn staged(&self, k: usize) -> u32 {
        self.p.n0(k, self.p.staging())
    }

    /// Root bounds.
    pub fn root_bounds(&self) -> Bounds {
        let l = self.layout;
        let p = self.p;
        let mut lo = vec![0.0; l.len()];
        let mut hi = vec![f64::INFINITY; l.len()];
        for k in 0..l.classes {
            let physical: u32 = (0..l.servers).map(|s| p.n0(k, s)).sum();
            let np = self.staged(k);
            for s in 0..l.servers {
                let n0 = p.n0(k, s);
                hi[l.pair(Kind::Out, k, s)] = n0 as f64;
                hi[l.pair(Kind::New, k, s)] = np as f64;
                hi[l.pair(Kind::In, k, s)] = (physical - n0) as f64;
                hi[l.pair(Kind::OutGate, k, s)] = if n0 > 0 { 1.0 } else { 0.0 };
                hi[l.pair(Kind::NewGate, k, s)] = if np > 0 { 1.0 } else { 0.0 };
            }
        }
        for s in 0..l.servers {
            let mu = l.server(ServerVar::Mu, s);
            lo[mu] = if p.state.servers[s].optional { 0.0 } else { 1.0 };
            hi[mu] = 1.0;
            hi[l.server(ServerVar::Participates, s)] = 1.0;
            hi[l.server(ServerVar::EngineOn, s)] = 1.0;
            hi[l.server(ServerVar::Window, s)] = p.ctx.slot_length;
        }
        Bounds { lo, hi }
    }

    /// Tightens bounds implied by the logical structure. Returns `false` if
    /// the node is empty.
    pub fn propagate(&self, b: &mut Bounds) -> bool {
        let l = self.layout;
        let p = self.p;
        let ctx = &p.ctx;
        for s in 0..l.servers {
            let mu = l.server(ServerVar::Mu, s);
            let off = b.hi[mu] < 0.5;
            let mut any_out_lo = 0.0f64;
            let mut any_out_hi = 0.0f64;
            for k in 0..l.classes {
                let (o, i, m) = (l.pair(Kind::Out, k, s), l.pair(Kind::New, k, s), l.pair(Kind::In, k, s));
                let (g, z) = (l.pair(Kind::OutGate, k, s), l.pair(Kind::NewGate, k, s));
                if off {
                    b.hi[i] = 0.0;
                    b.hi[m] = 0.0;
                    b.lo[o] = b.lo[o].max(p.n0(k, s) as f64);
                }
                if b.hi[g] < 0.5 {
                    b.hi[o] = 0.0;
                }
                if b.lo[o] >= 0.5 {
                    b.lo[g] = 1.0;
                }
                if b.hi[o] < 0.5 {
                    b.hi[g] = 0.0;
                }
                if b.hi[z] < 0.5 {
                    b.hi[i] = 0.0;
                }
                if b.lo[i] >= 0.5 {
                    b.lo[z] = 1.0;
                }
                if b.hi[i] < 0.5 {
                    b.hi[z] = 0.0;
                }
                any_out_lo = any_out_lo.max(b.lo[g]);
                any_out_hi = any_out_hi.max(b.hi[g]);
            }
            let y = l.server(ServerVar::Participates, s);
            b.lo[y] = b.lo[y].max(any_out_lo);
            b.hi[y] = b.hi[y].min(any_out_hi);

            // window and power ranges implied by the integer bounds
            let (mut wl, mut wu, mut pl, mut pu) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..l.classes {
                let (o, i, m) = (l.pair(Kind::Out, k, s), l.pair(Kind::New, k, s), l.pair(Kind::In, k, s));
                let (g, z) = (l.pair(Kind::OutGate, k, s), l.pair(Kind::NewGate, k, s));
                let (dm, bm) = (ctx.duration.slope, ctx.duration.intercept);
                let (di, bi) = (ctx.instantiation.slope, ctx.instantiation.intercept);
                wl += dm * b.lo[o] + bm * b.lo[g] + di * b.lo[i] + bi * b.lo[z];
                wu += dm * b.hi[o] + bm * b.hi[g] + di * b.hi[i] + bi * b.hi[z];
                let pe = ctx.load[k][Metric::Energy.index()];
                let n0 = p.n0(k, s) as f64;
                pl += pe * (n0 - b.hi[o] + b.lo[i] + b.lo[m]).max(0.0);
                pu += pe * (n0 - b.lo[o] + b.hi[i] + b.hi[m]);
            }
            let wv = l.server(ServerVar::Window, s);
            b.lo[wv] = b.lo[wv].max(wl);
            b.hi[wv] = b.hi[wv].min(wu);
            let pv = l.server(ServerVar::Power, s);
            b.lo[pv] = b.lo[pv].max(pl);
            b.hi[pv] = b.hi[pv].min(pu);
        }
        b.lo.iter().zip(&b.hi).all(|(lo, hi)| *lo <= *hi + 1e-9)
    }

    /// Solves the relaxation within `b`. `None` when infeasible.
    pub fn solve(&self, b: &Bounds, drop: Drop) -> Option<LpSolution> {
        let l = self.layout;
        let p = self.p;
        let ctx = &p.ctx;
        let strategy = p.strategy();
        let slot = ctx.slot_length;
        let q_e = ctx.idle[Metric::Energy.index()];
        let engine_e = ctx.sm_overhead[Metric::Energy.index()];
        let sdl_e = ctx.sdl_energy_per_server();
        let (dm, bm) = (ctx.duration.slope, ctx.duration.intercept);
        let (di, bi) = (ctx.instantiation.slope, ctx.instantiation.intercept);

        let mut cost = vec![0.0; l.len()];
        for s in 0..l.servers {
            let p0: f64 = (0..l.classes)
                .map(|k| ctx.load[k][Metric::Energy.index()] * p.n0(k, s) as f64)
                .sum();
            cost[l.server(ServerVar::Mu, s)] = slot * q_e + if strategy.is_stateful() { 0.0 } else { sdl_e };
            cost[l.server(ServerVar::Window, s)] = q_e + p0;
            cost[l.server(ServerVar::WindowMu, s)] = -q_e;
            cost[l.server(ServerVar::WindowPower, s)] = -1.0;
            if strategy.is_stateful() {
                for k in 0..l.classes {
                    cost[l.pair(Kind::Out, k, s)] += engine_e * dm;
                    cost[l.pair(Kind::OutGate, k, s)] += engine_e * bm;
                }
            }
        }

        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<Variable> = (0..l.len())
            .map(|j| {
                let hi = b.hi[j].max(b.lo[j]);
                lp.add_var(cost[j], (b.lo[j], hi))
            })
            .collect();
        let v = |j: usize| vars[j];
        use ComparisonOp::{Eq, Ge, Le};

        for k in 0..l.classes {
            let mut balance = Vec::new();
            let mut placed = Vec::new();
            for s in 0..l.servers {
                balance.push((v(l.pair(Kind::Out, k, s)), 1.0));
                balance.push((v(l.pair(Kind::In, k, s)), -1.0));
                placed.push((v(l.pair(Kind::New, k, s)), 1.0));
            }
            lp.add_constraint(balance.as_slice(), Eq, 0.0);
            lp.add_constraint(placed.as_slice(), Eq, self.staged(k) as f64);

            for s in 0..l.servers {
                // arrivals must come from some other server
                let mut hall = vec![(v(l.pair(Kind::In, k, s)), 1.0)];
                for t in (0..l.servers).filter(|&t| t != s) {
                    hall.push((v(l.pair(Kind::Out, k, t)), -1.0));
                }
                lp.add_constraint(hall.as_slice(), Le, 0.0);

                let n0 = p.n0(k, s) as f64;
                let np = self.staged(k) as f64;
                let (o, i, g, z) = (
                    l.pair(Kind::Out, k, s),
                    l.pair(Kind::New, k, s),
                    l.pair(Kind::OutGate, k, s),
                    l.pair(Kind::NewGate, k, s),
                );
                lp.add_constraint([(v(o), 1.0), (v(g), -n0)], Le, 0.0);
                lp.add_constraint([(v(g), 1.0), (v(o), -1.0)], Le, 0.0);
                lp.add_constraint([(v(i), 1.0), (v(z), -np)], Le, 0.0);
                lp.add_constraint([(v(z), 1.0), (v(i), -1.0)], Le, 0.0);
                lp.add_constraint([(v(l.server(ServerVar::Participates, s)), 1.0), (v(g), -1.0)], Ge, 0.0);

                // hosting only on active servers
                let total = ctx.totals[k] as f64;
                lp.add_constraint(
                    [
                        (v(o), -1.0),
                        (v(i), 1.0),
                        (v(l.pair(Kind::In, k, s)), 1.0),
                        (v(l.server(ServerVar::Mu, s)), -total),
                    ],
                    Le,
                    -n0,
                );
            }
        }

        for s in 0..l.servers {
            let mu = v(l.server(ServerVar::Mu, s));
            let y = v(l.server(ServerVar::Participates, s));
            let t = v(l.server(ServerVar::EngineOn, s));
            let w_len = v(l.server(ServerVar::Window, s));
            let pow = v(l.server(ServerVar::Power, s));

            let mut any = vec![(y, 1.0)];
            for k in 0..l.classes {
                any.push((v(l.pair(Kind::OutGate, k, s)), -1.0));
            }
            lp.add_constraint(any.as_slice(), Le, 0.0);
            lp.add_constraint([(t, 1.0), (y, -1.0), (mu, -1.0)], Ge, -1.0);

            if !drop.capacity {
                let spec = &p.state.servers[s];
                for r in Resource::ALL {
                    let metric = Metric::from(r);
                    let share = if strategy.is_stateful() { 0.0 } else { ctx.sdl_share[metric.index()] };
                    let room = spec.capacity(r) - ctx.idle[metric.index()] - share;
                    let mut row = vec![(mu, -room)];
                    let mut rhs = 0.0;
                    for k in 0..l.classes {
                        let pk = ctx.load[k][metric.index()];
                        if pk != 0.0 {
                            row.push((v(l.pair(Kind::Out, k, s)), -pk));
                            row.push((v(l.pair(Kind::New, k, s)), pk));
                            row.push((v(l.pair(Kind::In, k, s)), pk));
                            rhs -= pk * p.n0(k, s) as f64;
                        }
                    }
                    let engine = ctx.sm_overhead[metric.index()];
                    if strategy.is_stateful() && engine != 0.0 {
                        row.push((t, engine));
                    }
                    lp.add_constraint(row.as_slice(), Le, rhs);
                }
            }

            if !drop.hosts_load && p.state.servers[s].optional {
                let mut row = vec![(mu, 1.0)];
                let mut rhs = 0.0;
                for k in 0..l.classes {
                    row.push((v(l.pair(Kind::Out, k, s)), 1.0));
                    row.push((v(l.pair(Kind::New, k, s)), -1.0));
                    row.push((v(l.pair(Kind::In, k, s)), -1.0));
                    rhs += p.n0(k, s) as f64;
                }
                lp.add_constraint(row.as_slice(), Le, rhs);
            }

            if !drop.downtime && strategy.is_stateful() {
                let (dd, bd) = (ctx.downtime.slope, ctx.downtime.intercept);
                let mut row = Vec::new();
                for k in 0..l.classes {
                    row.push((v(l.pair(Kind::Out, k, s)), dd));
                    row.push((v(l.pair(Kind::OutGate, k, s)), bd));
                }
                lp.add_constraint(row.as_slice(), Le, p.params.max_sm_downtime);
            }

            let mut window = vec![(w_len, 1.0)];
            let mut power = vec![(pow, 1.0)];
            let mut p0 = 0.0;
            for k in 0..l.classes {
                window.push((v(l.pair(Kind::Out, k, s)), -dm));
                window.push((v(l.pair(Kind::OutGate, k, s)), -bm));
                window.push((v(l.pair(Kind::New, k, s)), -di));
                window.push((v(l.pair(Kind::NewGate, k, s)), -bi));
                let pe = ctx.load[k][Metric::Energy.index()];
                power.push((v(l.pair(Kind::Out, k, s)), pe));
                power.push((v(l.pair(Kind::New, k, s)), -pe));
                power.push((v(l.pair(Kind::In, k, s)), -pe));
                p0 += pe * p.n0(k, s) as f64;
            }
            lp.add_constraint(window.as_slice(), Eq, 0.0);
            lp.add_constraint(power.as_slice(), Eq, p0);

            let wl = b.lo[l.server(ServerVar::Window, s)];
            let wu = b.hi[l.server(ServerVar::Window, s)].max(wl);
            let ml = b.lo[l.server(ServerVar::Mu, s)];
            let mu_hi = b.hi[l.server(ServerVar::Mu, s)].max(ml);
            let pl = b.lo[l.server(ServerVar::Power, s)];
            let pu = b.hi[l.server(ServerVar::Power, s)].max(pl);
            let vm = v(l.server(ServerVar::WindowMu, s));
            let vp = v(l.server(ServerVar::WindowPower, s));
            lp.add_constraint([(vm, 1.0), (mu, -wu), (w_len, -ml)], Le, -wu * ml);
            lp.add_constraint([(vm, 1.0), (mu, -wl), (w_len, -mu_hi)], Le, -wl * mu_hi);
            lp.add_constraint([(vp, 1.0), (pow, -wu), (w_len, -pl)], Le, -wu * pl);
            lp.add_constraint([(vp, 1.0), (pow, -wl), (w_len, -pu)], Le, -wl * pu);
        }

        let sol = lp.solve().ok()?;
        let values = vars.iter().map(|&var| sol[var]).collect();
        Some(LpSolution {
            objective: sol.objective() + self.constant,
            values,
        })
    }
}
