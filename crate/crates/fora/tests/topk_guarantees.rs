//! Trial-level guarantee checks for the top-k algorithms: the two
//! approximation inequalities of the top-k contract, and containment of the
//! oracle by the confidence bounds on small graphs.

mod common;

use common::exact_top_k;
use fora::eval::exact_ppr;
use fora::graph::Graph;
use fora::params::QueryParams;
use fora::topk::{topk_bound_refine, topk_fast, update_bounds, BoundState, Estimator, TopKResult};
use fora::walks::WalkRng;

fn skewed_graph(n: u32, seed: u64) -> Graph {
    let mut edges = fora::gen::preferential_attachment_edges(n, 4, seed);
    edges.extend(fora::gen::cycle_edges(n));
    Graph::from_edges(&edges, false).unwrap()
}

/// Returned entries satisfy, for each rank i whose true i-th score exceeds
/// the final threshold: estimate >= (1-eps) * true score of the returned
/// node, and true score of the returned node >= (1-eps) * true i-th score.
fn trial_satisfies_contract(
    g: &Graph,
    source: u32,
    k: usize,
    params: &QueryParams,
    result: &TopKResult,
) -> bool {
    let exact = exact_ppr(g, source, params.alpha, 400, 1e-13);
    let truth = exact_top_k(&exact, k);
    for (i, &(v, est)) in result.entries.iter().enumerate() {
        let ith_true = exact.scores[truth[i] as usize];
        if ith_true <= result.delta_final {
            continue;
        }
        let pi_v = exact.scores[v as usize];
        if est < (1.0 - params.epsilon) * pi_v - 1e-12 {
            return false;
        }
        if pi_v < (1.0 - params.epsilon) * ith_true - 1e-12 {
            return false;
        }
    }
    true
}

#[test]
fn topk_contract_holds_in_enough_trials() {
    let g = skewed_graph(200, 21);
    let n = g.node_count();
    let params = QueryParams::defaults_for(n).unwrap();
    let k = 10;
    let trials = 60u64;
    // Failure budget: 10 * p_f per trial, over `trials` runs per algorithm.
    let allowed = (10.0 * params.p_f * trials as f64).ceil() as u64;
    for refine in [false, true] {
        let mut failures = 0u64;
        for t in 0..trials {
            let source = ((t * 13) % n as u64) as u32;
            let est = Estimator::Fora {
                rng: WalkRng::new(7000 + t),
                zero_hop: false,
            };
            let result = if refine {
                topk_bound_refine(&g, &est, source, k, &params).unwrap()
            } else {
                topk_fast(&g, &est, source, k, &params).unwrap()
            };
            if !trial_satisfies_contract(&g, source, k, &params, &result) {
                failures += 1;
            }
        }
        assert!(
            failures <= allowed,
            "refine={refine}: {failures} failing trials of {trials} (allowed {allowed})"
        );
    }
}

#[test]
fn bounds_contain_oracle_on_small_graphs_across_seeds() {
    let g = skewed_graph(30, 5);
    let n = g.node_count();
    let params = QueryParams::new(0.2, 0.5, 1.0 / n as f64, 1.0 / n as f64).unwrap();
    let p_f_prime = params.p_f / (n as f64 * (n as f64).log2().max(1.0));
    let k = 5;
    let mut violations = 0u64;
    for seed in 0..100u64 {
        let source = (seed % n as u64) as u32;
        let exact = exact_ppr(&g, source, params.alpha, 400, 1e-14);
        let estimator = Estimator::Fora {
            rng: WalkRng::new(seed),
            zero_hop: false,
        };
        let mut bounds = BoundState::new(n);
        let mut delta = 1.0 / k as f64;
        let floor = 1.0 / n as f64;
        loop {
            let run = estimator
                .run(&g, source, params.alpha, params.epsilon, delta, p_f_prime)
                .unwrap();
            if run.omega > 0.0 {
                update_bounds(
                    &mut bounds,
                    &run.base,
                    &run.scores,
                    run.r_sum,
                    run.omega,
                    p_f_prime,
                );
            }
            for v in 0..n {
                let pi = exact.scores[v];
                if bounds.lb[v] > pi + 1e-9 || pi > bounds.ub[v] + 1e-9 {
                    violations += 1;
                }
            }
            if delta <= floor {
                break;
            }
            delta = (delta / 2.0).max(floor);
        }
    }
    assert!(violations <= 1, "{violations} containment violations");
}
