//! Property tests over randomized graphs and parameters.

use proptest::prelude::*;

use fora::graph::{Graph, NodeId};
use fora::index::{build_index, query_with_index, WalkIndex};
use fora::params::QueryParams;
use fora::push::{forward_push, MASS_TOLERANCE};
use fora::query::{choose_r_max, whole_graph_balanced, whole_graph_basic};
use fora::walks::WalkRng;

fn arb_edges() -> impl Strategy<Value = Vec<(NodeId, NodeId)>> {
    proptest::collection::vec((0u32..40, 0u32..40), 1..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degrees_sum_to_edge_count(edges in arb_edges(), undirected: bool) {
        let g = Graph::from_edges(&edges, undirected).unwrap();
        let total: usize = (0..g.node_count()).map(|v| g.out_degree(v as NodeId)).sum();
        prop_assert_eq!(total, g.edge_count());
        let expected = if undirected { 2 * edges.len() } else { edges.len() };
        prop_assert_eq!(g.edge_count(), expected);
    }

    #[test]
    fn edge_list_text_round_trips(edges in arb_edges()) {
        // The max id always appears in some edge, so reloading the text
        // reproduces the node count too.
        let g = Graph::from_edges(&edges, false).unwrap();
        let reparsed: Vec<(NodeId, NodeId)> = g
            .to_edge_list()
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
            })
            .collect();
        let g2 = Graph::from_edges(&reparsed, false).unwrap();
        prop_assert_eq!(&g2, &g);
    }

    #[test]
    fn push_terminates_and_conserves_mass(
        edges in arb_edges(),
        source_pick in 0u32..40,
        r_max_exp in 1u32..5,
        alpha in 0.05f64..0.95,
    ) {
        let g = Graph::from_edges(&edges, false).unwrap();
        let source = source_pick % g.node_count() as u32;
        let r_max = 10f64.powi(-(r_max_exp as i32));
        let state = forward_push(&g, source, alpha, r_max);
        state.check_conservation(MASS_TOLERANCE).unwrap();
        // Termination condition: no node is still pushable.
        for v in 0..g.node_count() as NodeId {
            let deg = g.out_degree(v);
            if deg == 0 {
                prop_assert_eq!(state.residue(v), 0.0);
            } else {
                prop_assert!(state.residue(v) <= r_max * deg as f64);
            }
        }
    }

    #[test]
    fn whole_graph_estimates_normalize(
        edges in arb_edges(),
        source_pick in 0u32..40,
        seed: u64,
    ) {
        let g = Graph::from_edges(&edges, false).unwrap();
        let source = source_pick % g.node_count() as u32;
        let params = QueryParams::new(0.2, 0.5, 0.05, 0.05).unwrap();
        let rng = WalkRng::new(seed);
        let basic = whole_graph_basic(&g, source, &params, choose_r_max(&g, &params), &rng);
        let total: f64 = basic.scores.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(basic.scores.iter().all(|&s| s >= 0.0));
        let balanced = whole_graph_balanced(&g, source, &params, &rng);
        let total: f64 = balanced.scores.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn index_round_trip_and_equivalence(
        edges in arb_edges(),
        seed: u64,
        source_pick in 0u32..40,
        zero_hop: bool,
    ) {
        let g = Graph::from_edges(&edges, false).unwrap();
        let params = QueryParams::new(0.2, 0.5, 0.05, 0.05).unwrap();
        let r_max = choose_r_max(&g, &params);
        let idx = build_index(&g, &params, r_max, seed, zero_hop);
        let bytes = idx.to_bytes();
        let back = WalkIndex::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &idx);

        if !zero_hop {
            let source = source_pick % g.node_count() as u32;
            let online = whole_graph_basic(&g, source, &params, r_max, &WalkRng::new(seed));
            let served = query_with_index(&g, &idx, source, &params).unwrap();
            prop_assert_eq!(online, served);
        }
    }
}
