//! Deterministic benchmark-graph generators.

use std::fmt::Write as _;

use crate::graph::NodeId;
use crate::walks::WalkRng;

/// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
pub fn cycle_edges(n: u32) -> Vec<(NodeId, NodeId)> {
    assert!(n >= 1);
    (0..n).map(|v| (v, (v + 1) % n)).collect()
}

/// Directed path `0 -> 1 -> ... -> n-1`; the last node dangles.
pub fn path_edges(n: u32) -> Vec<(NodeId, NodeId)> {
    assert!(n >= 2);
    (0..n - 1).map(|v| (v, v + 1)).collect()
}

/// Star with center 0 and dangling leaves.
pub fn star_edges(n: u32) -> Vec<(NodeId, NodeId)> {
    assert!(n >= 2);
    (1..n).map(|v| (0, v)).collect()
}

/// `m` directed edges with endpoints uniform over `n` nodes, self-loops
/// rejected, duplicates kept.
pub fn erdos_renyi_edges(n: u32, m: u64, seed: u64) -> Vec<(NodeId, NodeId)> {
    assert!(n >= 2);
    let mut stream = WalkRng::new(seed).stream(u32::MAX, 0);
    let mut edges = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let u = stream.next_below(n);
        let mut v = stream.next_below(n);
        while v == u {
            v = stream.next_below(n);
        }
        edges.push((u, v));
    }
    edges
}

/// Preferential attachment: after a seed cycle of `degree` nodes, each new
/// node sends `degree` edges to targets drawn proportionally to their
/// current edge-endpoint counts. In-degrees become heavy-tailed, which makes
/// PPR vectors suitably skewed for top-k exercises.
pub fn preferential_attachment_edges(n: u32, degree: u32, seed: u64) -> Vec<(NodeId, NodeId)> {
    assert!(degree >= 1);
    assert!(n > degree, "need more nodes than the attachment degree");
    let mut stream = WalkRng::new(seed).stream(u32::MAX, 1);
    let d0 = degree.max(2);
    let mut edges = cycle_edges(d0.min(n));
    let mut endpoints: Vec<NodeId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    for v in d0.min(n)..n {
        for _ in 0..degree {
            let t = endpoints[stream.next_below(endpoints.len() as u32) as usize];
            edges.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    edges
}

/// Edge list in generation order, one `src dst` line per edge.
pub fn edges_to_text(edges: &[(NodeId, NodeId)]) -> String {
    let mut out = String::new();
    for &(u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn cycle_of_two_matches_expected_text() {
        assert_eq!(edges_to_text(&cycle_edges(2)), "0 1\n1 0\n");
    }

    #[test]
    fn star_of_four_matches_expected_text() {
        assert_eq!(edges_to_text(&star_edges(4)), "0 1\n0 2\n0 3\n");
    }

    #[test]
    fn erdos_renyi_is_deterministic_and_loadable() {
        let a = erdos_renyi_edges(50, 200, 7);
        let b = erdos_renyi_edges(50, 200, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|&(u, v)| u != v));
        let g = Graph::from_edges(&a, false).unwrap();
        assert_eq!(g.edge_count(), 200);
    }

    #[test]
    fn preferential_attachment_shape() {
        let edges = preferential_attachment_edges(100, 3, 1);
        let g = Graph::from_edges(&edges, false).unwrap();
        assert_eq!(g.node_count(), 100);
        // Every non-seed node has out-degree exactly `degree`.
        for v in 3..100 {
            assert_eq!(g.out_degree(v), 3);
        }
    }
}
