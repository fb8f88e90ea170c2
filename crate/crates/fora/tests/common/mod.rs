//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)] // each test target uses a different subset

use fora::eval::{exact_ppr, ExactPpr};
use fora::gen;
use fora::graph::{Graph, NodeId};
use fora::push::PushState;
use fora::walks::WalkRng;

/// Full PPR matrix: row `v` holds the exact vector from source `v`.
pub fn ppr_matrix(g: &Graph, alpha: f64) -> Vec<Vec<f64>> {
    (0..g.node_count() as NodeId)
        .map(|v| exact_ppr(g, v, alpha, 400, 1e-14).scores)
        .collect()
}

/// Largest per-target violation of the push identity
/// `pi(sigma,t) = reserve(t) + sum_v residue(v) * pi(v,t)` given the exact
/// matrix and the exact vector for the push's own source distribution.
pub fn invariant_gap(exact_from_sigma: &[f64], state: &PushState, matrix: &[Vec<f64>]) -> f64 {
    let n = exact_from_sigma.len();
    let mut reconstructed: Vec<f64> = (0..n).map(|t| state.reserve(t as NodeId)).collect();
    for (v, r) in state.residue_nodes() {
        let row = &matrix[v as usize];
        for t in 0..n {
            reconstructed[t] += r * row[t];
        }
    }
    exact_from_sigma
        .iter()
        .zip(reconstructed.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Deterministic mixed battery graph: cycles, paths, stars (dangling
/// leaves), and sparse random digraphs with extra dangling sinks.
pub fn battery_graph(case: u64, max_n: u32) -> Graph {
    let mut stream = WalkRng::new(0xBA77E4).stream(case as u32, case);
    let n = 4 + stream.next_below(max_n.saturating_sub(4).max(1));
    let edges = match case % 5 {
        0 => gen::cycle_edges(n),
        1 => gen::path_edges(n.max(2)),
        2 => gen::star_edges(n.max(2)),
        3 => {
            // Random digraph with a dangling tail appended.
            let core = n.max(6) - 2;
            let m = 2 * core as u64 + stream.next_below(3 * core) as u64;
            let mut edges = gen::erdos_renyi_edges(core, m, case.wrapping_mul(31).wrapping_add(7));
            edges.push((0, core)); // core -> dangling sink
            edges.push((1.min(core - 1), core + 1));
            edges
        }
        _ => {
            let m = 3 * n as u64;
            gen::erdos_renyi_edges(n, m, case.wrapping_mul(131).wrapping_add(17))
        }
    };
    Graph::from_edges(&edges, false).unwrap()
}

/// Exact scores ranked descending with id tie-break; first k node ids.
pub fn exact_top_k(exact: &ExactPpr, k: usize) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..exact.scores.len() as NodeId).collect();
    order.sort_by(|&a, &b| {
        exact.scores[b as usize]
            .total_cmp(&exact.scores[a as usize])
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}
