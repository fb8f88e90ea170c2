//! Ground truth and metrics: power-iteration PPR/PageRank oracle,
//! relative-error audit, precision@k, NDCG@k.

use crate::graph::{Graph, NodeId};
use crate::params::QueryParams;
use crate::query::PprEstimate;

/// Exact PPR vector from power iteration.
#[derive(Debug, Clone)]
pub struct ExactPpr {
    pub scores: Vec<f64>,
    pub iterations: u32,
    /// L1 change of the final iteration.
    pub residual: f64,
}

/// Report from auditing an estimate against exact scores.
#[derive(Debug, Clone)]
pub struct ViolationReport {
    /// Nodes above the threshold whose estimate misses the relative bound.
    pub nodes: Vec<NodeId>,
    pub count: usize,
    /// Number of nodes with exact score above the threshold.
    pub eligible: usize,
}

impl ViolationReport {
    pub fn fraction(&self) -> f64 {
        if self.eligible == 0 {
            0.0
        } else {
            self.count as f64 / self.eligible as f64
        }
    }
}

/// One application of the PPR fixed-point operator:
/// `alpha * sigma + (1 - alpha) * (push pi through out-edges)`, where a
/// dangling node keeps its outgoing mass on itself. This matches the walk
/// semantics: a walker at a dangling node can never leave, so its mass is
/// fixed once it arrives.
fn apply_operator(g: &Graph, sigma: &[f64], alpha: f64, pi: &[f64], next: &mut [f64]) {
    let n = g.node_count();
    for v in 0..n {
        next[v] = alpha * sigma[v];
    }
    for u in 0..n {
        let mass = (1.0 - alpha) * pi[u];
        if mass == 0.0 {
            continue;
        }
        let neighbors = g.out_neighbors(u as NodeId);
        if neighbors.is_empty() {
            next[u] += mass;
        } else {
            let share = mass / neighbors.len() as f64;
            for &t in neighbors {
                next[t as usize] += share;
            }
        }
    }
}

/// Power iteration for PPR from a source distribution. Runs up to `iters`
/// rounds, stopping early when the L1 change drops below `tol`.
pub fn power_iteration(
    g: &Graph,
    sigma: &[(NodeId, f64)],
    alpha: f64,
    iters: u32,
    tol: f64,
) -> ExactPpr {
    assert!(iters >= 1);
    let n = g.node_count();
    let mut dense_sigma = vec![0.0; n];
    for &(v, p) in sigma {
        dense_sigma[v as usize] += p;
    }
    let mut pi = dense_sigma.clone();
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    let mut done = 0;
    for _ in 0..iters {
        apply_operator(g, &dense_sigma, alpha, &pi, &mut next);
        change = pi.iter().zip(next.iter()).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        done += 1;
        if change < tol {
            break;
        }
    }
    ExactPpr {
        scores: pi,
        iterations: done,
        residual: change,
    }
}

/// Single-source convenience wrapper around `power_iteration`.
pub fn exact_ppr(g: &Graph, source: NodeId, alpha: f64, iters: u32, tol: f64) -> ExactPpr {
    power_iteration(g, &[(source, 1.0)], alpha, iters, tol)
}

/// L1 distance between `scores` and one application of the fixed-point
/// operator; near zero for a converged oracle.
pub fn fixed_point_residual(g: &Graph, sigma: &[(NodeId, f64)], alpha: f64, scores: &[f64]) -> f64 {
    let n = g.node_count();
    let mut dense_sigma = vec![0.0; n];
    for &(v, p) in sigma {
        dense_sigma[v as usize] += p;
    }
    let mut next = vec![0.0; n];
    apply_operator(g, &dense_sigma, alpha, scores, &mut next);
    scores
        .iter()
        .zip(next.iter())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Nodes ranked by exact score, descending, ties broken by lower id.
pub fn exact_ranking(exact: &ExactPpr) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..exact.scores.len() as NodeId).collect();
    order.sort_by(|&a, &b| {
        exact.scores[b as usize]
            .total_cmp(&exact.scores[a as usize])
            .then(a.cmp(&b))
    });
    order
}

/// Fraction of the returned nodes that are true top-k nodes. Nodes whose
/// exact score ties the k-th largest (within 1e-12) all count as acceptable.
pub fn precision_at_k(returned: &[NodeId], exact: &ExactPpr, k: usize) -> f64 {
    assert_eq!(returned.len(), k, "returned list must have exactly k nodes");
    assert!(k >= 1 && k <= exact.scores.len());
    let order = exact_ranking(exact);
    let kth = exact.scores[order[k - 1] as usize];
    let hits = returned
        .iter()
        .filter(|&&v| exact.scores[v as usize] >= kth - 1e-12)
        .count();
    hits as f64 / k as f64
}

/// Normalized discounted cumulative gain of the returned ordering against
/// the ideal ordering, with gain `2^score - 1` and log base 2. The ideal
/// normalizer uses the i-th largest exact score at rank i, so a perfect
/// ranking scores exactly 1.
pub fn ndcg_at_k(returned: &[NodeId], exact: &ExactPpr, k: usize) -> f64 {
    assert_eq!(returned.len(), k, "returned list must have exactly k nodes");
    assert!(k >= 1 && k <= exact.scores.len());
    let gain = |v: NodeId| (2.0f64).powf(exact.scores[v as usize]) - 1.0;
    let discount = |rank: usize| 1.0 / ((rank + 2) as f64).log2();
    let dcg: f64 = returned
        .iter()
        .enumerate()
        .map(|(i, &v)| gain(v) * discount(i))
        .sum();
    let order = exact_ranking(exact);
    let ideal: f64 = order[..k]
        .iter()
        .enumerate()
        .map(|(i, &v)| gain(v) * discount(i))
        .sum();
    if ideal == 0.0 {
        1.0
    } else {
        dcg / ideal
    }
}

/// Counts nodes with exact score above `params.delta` whose estimate
/// violates the relative bound `|pi - est| <= epsilon * pi`.
pub fn audit_relative_error(
    est: &PprEstimate,
    exact: &ExactPpr,
    params: &QueryParams,
) -> ViolationReport {
    assert_eq!(est.scores.len(), exact.scores.len(), "node counts differ");
    let mut nodes = Vec::new();
    let mut eligible = 0;
    for v in 0..exact.scores.len() {
        let pi = exact.scores[v];
        if pi > params.delta {
            eligible += 1;
            if (pi - est.scores[v]).abs() > params.epsilon * pi {
                nodes.push(v as NodeId);
            }
        }
    }
    ViolationReport {
        count: nodes.len(),
        nodes,
        eligible,
    }
}
