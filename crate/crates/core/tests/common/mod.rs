//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod oracle;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sal_core::orchestrator::baseline_plan;
use sal_core::{CalibrationSet, ClusterState, ScenarioParams, ServerSpec, Strategy, XAppClass};

/// Cluster of testbed servers; `optional[s]` marks servers that may sleep.
pub fn cluster(classes: &[&str], counts: Vec<Vec<u32>>, optional: &[bool]) -> ClusterState {
    let servers = optional
        .iter()
        .enumerate()
        .map(|(i, &o)| ServerSpec::testbed(format!("s{i}"), o))
        .collect();
    let classes = classes.iter().map(|id| XAppClass::reference(id).unwrap()).collect();
    let mut st = ClusterState::new(classes, servers);
    st.initial_counts = counts;
    st
}

pub fn params(strategy: Strategy) -> ScenarioParams {
    ScenarioParams {
        strategy,
        ..ScenarioParams::default()
    }
}

/// Small random instance: three servers, at most two classes and six xApps,
/// with a feasible baseline.
pub fn small_instance(rng: &mut ChaCha8Rng, strategy: Strategy) -> (ClusterState, ScenarioParams) {
    let ids = ["A", "B", "C", "D"];
    loop {
        let class_count = rng.gen_range(1..=2);
        let mut chosen: Vec<&str> = Vec::new();
        while chosen.len() < class_count {
            let id = ids[rng.gen_range(0..4)];
            if !chosen.contains(&id) {
                chosen.push(id);
            }
        }
        let total = rng.gen_range(0..=6u32);
        let mut optional: Vec<bool> = (0..3).map(|_| rng.gen_bool(0.6)).collect();
        if optional.iter().all(|&o| o) {
            let s = rng.gen_range(0..3);
            optional[s] = false;
        }
        let mut st = cluster(&chosen, vec![vec![0; 3]; class_count], &optional);
        for srv in &mut st.servers {
            srv.cpu_cap = [6.0, 12.0, 128.0][rng.gen_range(0..3)];
            srv.mem_cap = [8.0, 16.0, 125.0][rng.gen_range(0..3)];
        }
        for _ in 0..total {
            let k = rng.gen_range(0..class_count);
            let s = rng.gen_range(0..4);
            if s == 3 {
                st.pending_deploys[k] += 1;
            } else {
                st.initial_counts[k][s] += 1;
            }
        }
        let mut p = params(strategy);
        p.max_sm_downtime = [20.0, 300.0][rng.gen_range(0..2)];
        if baseline_plan(&st, &p, &CalibrationSet::shipped()).is_ok() {
            return (st, p);
        }
    }
}
