//! Shared fixtures for the benchmark targets.

use mfnet_core::dynamics::{ModelSpec, StateAssignment};
use mfnet_core::graph::{gen_erdos_renyi, Graph};

pub fn er_graph(n: usize, mean_degree: f64, seed: u64) -> Graph {
    gen_erdos_renyi(n, mean_degree / (n as f64 - 1.0), seed).expect("benchmark graph")
}

pub fn sis_with_seeded_infection(g: &Graph, frac: f64) -> (ModelSpec, StateAssignment) {
    let m = ModelSpec::sis(2.0, 1.0).expect("model");
    let infected = (g.n() as f64 * frac) as usize;
    let mut init = StateAssignment::uniform(g.n(), 0, 2).expect("assignment");
    for v in 0..infected {
        init.set_state(v, 1);
    }
    (m, init)
}
