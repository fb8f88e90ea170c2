//! Pure Monte-Carlo whole-graph baseline: estimate PPR as the fraction of
//! seeded random walks terminating at each node.

use crate::graph::{Graph, NodeId};
use crate::params::QueryParams;
use crate::query::{walk_factor, PprEstimate};
use crate::walks::{random_walk, WalkRng};

/// Issues `ceil((2e/3 + 2) * ln(2/p_f) / (e^2 * d))` walks from `source`,
/// the same constant the push-walk estimator uses with a full unit of
/// residue, which keeps walk-count comparisons like-for-like.
pub fn mc_whole_graph(
    g: &Graph,
    source: NodeId,
    params: &QueryParams,
    rng: &WalkRng,
) -> PprEstimate {
    let omega = walk_factor(params.epsilon, params.delta, params.p_f);
    let count = omega.ceil() as u64;
    let mut hits = vec![0u64; g.node_count()];
    for j in 0..count {
        let t = random_walk(g, source, params.alpha, &mut rng.stream(source, j));
        hits[t as usize] += 1;
    }
    let scores = hits.iter().map(|&h| h as f64 / count as f64).collect();
    PprEstimate {
        scores,
        walks_issued: count,
        pushes: 0,
    }
}
