//! Turns per-server aggregates of one class into explicit flows.

/// Aggregates of one class: `out[s]` xApps leave physical server `s`,
/// `inn[s]` arrive from other physical servers and `new[s]` arrive from the
/// staging server.
pub(crate) struct ClassMoves<'a> {
    pub n0: &'a [u32],
    pub out: &'a [u32],
    pub inn: &'a [u32],
    pub new: &'a [u32],
}

/// Builds the `(S+1) x (S+1)` flow matrix of one class. Physical moves are
/// the lexicographically smallest transport without self-loops. Returns
/// `None` when no such transport exists.
pub(crate) fn realize_class(m: &ClassMoves<'_>) -> Option<Vec<Vec<u32>>> {
    let servers = m.n0.len();
    let staging = servers;
    let mut x = vec![vec![0u32; servers + 1]; servers + 1];
    for s in 0..servers {
        x[s][s] = m.n0[s].checked_sub(m.out[s])?;
        x[staging][s] = m.new[s];
    }

    let mut supply = m.out.to_vec();
    let mut demand = m.inn.to_vec();
    if supply.iter().sum::<u32>() != demand.iter().sum::<u32>() {
        return None;
    }
    if !transport_exists(&supply, &demand, 0, servers) {
        return None;
    }
    for s in 0..servers {
        for t in 0..servers {
            if s == t {
                continue;
            }
            let cap = supply[s].min(demand[t]);
            // smallest amount that keeps the rest solvable
            let mut chosen = None;
            for v in 0..=cap {
                supply[s] -= v;
                demand[t] -= v;
                let pos = s * servers + t + 1;
                let ok = transport_exists(&supply, &demand, pos, servers);
                supply[s] += v;
                demand[t] += v;
                if ok {
                    chosen = Some(v);
                    break;
                }
            }
            let v = chosen?;
            x[s][t] = v;
            supply[s] -= v;
            demand[t] -= v;
        }
    }
    if supply.iter().any(|&v| v > 0) || demand.iter().any(|&v| v > 0) {
        return None;
    }
    Some(x)
}

/// Whether `supply` can be routed to `demand` using only off-diagonal cells
/// at row-major positions `>= from`.
fn transport_exists(supply: &[u32], demand: &[u32], from: usize, n: usize) -> bool {
    let total: u32 = supply.iter().sum();
    if total != demand.iter().sum::<u32>() {
        return false;
    }
    if total == 0 {
        return true;
    }
    // nodes: source, supplies 0..n, demands n..2n, sink
    let size = 2 * n + 2;
    let (src, sink) = (2 * n, 2 * n + 1);
    let mut cap = vec![vec![0u64; size]; size];
    for s in 0..n {
        cap[src][s] = supply[s] as u64;
        cap[n + s][sink] = demand[s] as u64;
        for t in 0..n {
            if s != t && s * n + t >= from {
                cap[s][n + t] = u64::MAX / 4;
            }
        }
    }
    max_flow(&mut cap, src, sink) == total as u64
}

fn max_flow(cap: &mut [Vec<u64>], src: usize, sink: usize) -> u64 {
    let size = cap.len();
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[src] = src;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return flow;
        }
        let mut push = u64::MAX;
        let mut v = sink;
        while v != src {
            let u = prev[v];
            push = push.min(cap[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != src {
            let u = prev[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        flow += push;
    }
}
