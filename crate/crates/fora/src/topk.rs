//! Approximate top-k queries by iterative threshold halving.
//!
//! Both algorithms run whole-graph estimates at a decreasing threshold
//! `delta = 1/k, 1/2k, ..., 1/n`. The bound-refinement variant maintains
//! per-node confidence intervals across iterations and stops when the top-k
//! candidates are separated; the fast variant stops as soon as the k-th
//! largest estimate clears `(1 + eps) * delta`. Either runs over the online
//! estimator, the precomputed-walk index, or plain Monte Carlo.

use crate::error::{ForaError, Result};
use crate::graph::{Graph, NodeId};
use crate::index::WalkIndex;
use crate::params::QueryParams;
use crate::query::{r_max_for, run_whole_graph, walk_factor, WalkSource};
use crate::walks::{random_walk, WalkRng};

/// Ordered top-k answer.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKResult {
    /// `(node, estimated PPR)` pairs, descending by estimate, ties broken by
    /// lower node id.
    pub entries: Vec<(NodeId, f64)>,
    /// Threshold at termination.
    pub delta_final: f64,
    pub iterations: u32,
    pub walks: u64,
    pub pushes: u64,
    /// Whether the probabilistic stop conditions held; a refinement run that
    /// exhausts the schedule reports its best candidates uncertified.
    pub certified: bool,
}

/// Per-node lower/upper confidence bounds, intersected across iterations.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

impl BoundState {
    pub fn new(n: usize) -> Self {
        Self {
            lb: vec![0.0; n],
            ub: vec![1.0; n],
        }
    }
}

/// One whole-graph run in the shape the bound update needs.
#[derive(Debug, Clone)]
pub struct EstimatorRun {
    pub scores: Vec<f64>,
    /// Deterministic part of the estimate; a lower bound on the true score.
    pub base: Vec<f64>,
    /// Residue mass covered by walks.
    pub r_sum: f64,
    /// Real-valued walk budget.
    pub omega: f64,
    pub walks: u64,
    pub pushes: u64,
}

/// Tightens per-node bounds with one iteration's output.
///
/// The relative half-width is
/// `eps_j(v) = sqrt(3 r_sum L / (omega_j * max(base(v), lb(v))))` and the
/// additive one solves the quadratic `omega_j l^2 = L r_sum (2 UB(v) + 2l/3)`:
/// `l_j(v) = ((2/3) r_sum L + sqrt((4/9) r_sum^2 L^2 + 8 r_sum omega_j L UB(v)))
/// / (2 omega_j)`, with `L = ln(2/p_f')`. New bounds intersect the previous
/// ones, so they are monotone across iterations.
pub fn update_bounds(
    state: &mut BoundState,
    base: &[f64],
    estimate: &[f64],
    r_sum: f64,
    omega_j: f64,
    p_f_prime: f64,
) {
    assert!(omega_j > 0.0, "bound update needs a positive walk budget");
    let l = (2.0 / p_f_prime).ln();
    for (v, &est) in estimate.iter().enumerate() {
        let anchor = base[v].max(state.lb[v]);
        let eps_j = if anchor > 0.0 {
            (3.0 * r_sum * l / (omega_j * anchor)).sqrt()
        } else {
            f64::INFINITY
        };
        let lambda = ((2.0 / 3.0) * r_sum * l
            + ((4.0 / 9.0) * r_sum * r_sum * l * l + 8.0 * r_sum * omega_j * l * state.ub[v])
                .sqrt())
            / (2.0 * omega_j);
        let mut ub = state.ub[v].min(est + lambda).min(1.0);
        if eps_j < 1.0 {
            ub = ub.min(est / (1.0 - eps_j));
        }
        let lb = state.lb[v]
            .max(est / (1.0 + eps_j))
            .max(est - lambda)
            .max(0.0);
        state.ub[v] = ub;
        state.lb[v] = lb.min(ub);
    }
}

/// Exact run (no walks left): both bounds collapse onto the estimate.
fn collapse_bounds(state: &mut BoundState, estimate: &[f64]) {
    for (v, &est) in estimate.iter().enumerate() {
        state.ub[v] = state.ub[v].min(est);
        state.lb[v] = state.lb[v].max(est).min(state.ub[v]);
    }
}

/// Whole-graph estimator the top-k drivers iterate: the online push-walk
/// query, the same query over a precomputed-walk index, or Monte Carlo.
pub enum Estimator<'a> {
    Fora { rng: WalkRng, zero_hop: bool },
    ForaPlus { index: &'a WalkIndex },
    MonteCarlo { rng: WalkRng },
}

impl Estimator<'_> {
    /// One whole-graph run at explicit accuracy parameters; the top-k
    /// drivers call this per iteration with their own `(epsilon, delta,
    /// p_f)` schedule, and the push threshold is re-derived from them.
    pub fn run(
        &self,
        g: &Graph,
        source: NodeId,
        alpha: f64,
        epsilon: f64,
        delta: f64,
        p_f: f64,
    ) -> Result<EstimatorRun> {
        match self {
            Estimator::Fora { rng, zero_hop } => {
                let r_max = r_max_for(g.edge_count(), epsilon, delta, p_f);
                let run = run_whole_graph(
                    g,
                    &[(source, 1.0)],
                    alpha,
                    epsilon,
                    delta,
                    p_f,
                    r_max,
                    *zero_hop,
                    &WalkSource::Seeded(*rng),
                )?;
                Ok(EstimatorRun {
                    scores: run.output.scores,
                    base: run.output.base,
                    r_sum: run.output.walk_r_sum,
                    omega: run.output.omega,
                    walks: run.output.walks,
                    pushes: run.pushes,
                })
            }
            Estimator::ForaPlus { index } => {
                index.check_graph(g)?;
                let meta = index.meta();
                if meta.alpha != alpha {
                    return Err(ForaError::IndexMismatch(format!(
                        "index built with alpha={}, query uses alpha={alpha}",
                        meta.alpha
                    )));
                }
                let r_max = r_max_for(g.edge_count(), epsilon, delta, p_f);
                let run = run_whole_graph(
                    g,
                    &[(source, 1.0)],
                    alpha,
                    epsilon,
                    delta,
                    p_f,
                    r_max,
                    meta.zero_hop,
                    &WalkSource::Indexed {
                        index,
                        strict: false,
                    },
                )?;
                Ok(EstimatorRun {
                    scores: run.output.scores,
                    base: run.output.base,
                    r_sum: run.output.walk_r_sum,
                    omega: run.output.omega,
                    walks: run.output.walks,
                    pushes: run.pushes,
                })
            }
            Estimator::MonteCarlo { rng } => {
                let omega = walk_factor(epsilon, delta, p_f);
                let count = omega.ceil() as u64;
                let mut hits = vec![0u64; g.node_count()];
                for j in 0..count {
                    let t = random_walk(g, source, alpha, &mut rng.stream(source, j));
                    hits[t as usize] += 1;
                }
                let scores: Vec<f64> = hits.iter().map(|&h| h as f64 / count as f64).collect();
                Ok(EstimatorRun {
                    base: vec![0.0; scores.len()],
                    scores,
                    r_sum: 1.0,
                    omega,
                    walks: count,
                    pushes: 0,
                })
            }
        }
    }
}

/// Halving schedule from 1/k down to (exactly) 1/n.
fn delta_schedule(n: usize, k: usize) -> Vec<f64> {
    let floor = 1.0 / n as f64;
    let mut out = Vec::new();
    let mut d = 1.0 / k as f64;
    while d > floor {
        out.push(d);
        d /= 2.0;
    }
    out.push(floor);
    out
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k >= 1 && k <= n {
        Ok(())
    } else {
        Err(ForaError::InvalidParameter {
            name: "k",
            value: k as f64,
            expected: "1 <= k <= n",
        })
    }
}

/// Node ids sorted by `key` descending, ties broken by lower id.
fn ranked_by(n: usize, key: &[f64]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.sort_by(|&a, &b| key[b as usize].total_cmp(&key[a as usize]).then(a.cmp(&b)));
    order
}

fn entries_for(nodes: &[NodeId], scores: &[f64]) -> Vec<(NodeId, f64)> {
    let mut entries: Vec<(NodeId, f64)> = nodes.iter().map(|&v| (v, scores[v as usize])).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries
}

/// Top-k with bound refinement. Each iteration runs the estimator at the
/// current threshold with failure budget `p_f / (n log2 n)`, tightens the
/// per-node bounds, and returns the k nodes with the largest lower bounds
/// once (a) every candidate has `UB < (1+eps) LB`, (b) the k-th lower bound
/// reaches the threshold, and (c) no outsider with `UB > (1+eps) LB(k-th)`
/// is itself resolved to `UB < (1+eps) LB / (1-eps)`. If the schedule runs
/// out the best candidates are returned uncertified.
pub fn topk_bound_refine(
    g: &Graph,
    estimator: &Estimator,
    source: NodeId,
    k: usize,
    params: &QueryParams,
) -> Result<TopKResult> {
    let n = g.node_count();
    check_k(n, k)?;
    let p_f_prime = params.p_f / (n as f64 * (n as f64).log2().max(1.0));
    let mut bounds = BoundState::new(n);
    let mut walks = 0u64;
    let mut pushes = 0u64;
    let mut iterations = 0u32;
    let schedule = delta_schedule(n, k);
    let mut last_scores: Vec<f64> = Vec::new();
    for &delta in &schedule {
        let run = estimator.run(g, source, params.alpha, params.epsilon, delta, p_f_prime)?;
        iterations += 1;
        walks += run.walks;
        pushes += run.pushes;
        if run.omega > 0.0 {
            update_bounds(
                &mut bounds,
                &run.base,
                &run.scores,
                run.r_sum,
                run.omega,
                p_f_prime,
            );
        } else {
            collapse_bounds(&mut bounds, &run.scores);
        }

        let order = ranked_by(n, &bounds.lb);
        let candidates = &order[..k];
        let eps = params.epsilon;
        let separated = candidates
            .iter()
            .all(|&v| bounds.ub[v as usize] < (1.0 + eps) * bounds.lb[v as usize]);
        let kth_lb = bounds.lb[candidates[k - 1] as usize];
        if separated && kth_lb >= delta {
            let in_candidates = {
                let mut flag = vec![false; n];
                for &v in candidates {
                    flag[v as usize] = true;
                }
                flag
            };
            let blocked = (0..n).any(|u| {
                !in_candidates[u]
                    && bounds.ub[u] > (1.0 + eps) * kth_lb
                    && bounds.ub[u] < (1.0 + eps) * bounds.lb[u] / (1.0 - eps)
            });
            if !blocked {
                return Ok(TopKResult {
                    entries: entries_for(candidates, &run.scores),
                    delta_final: delta,
                    iterations,
                    walks,
                    pushes,
                    certified: true,
                });
            }
        }
        last_scores = run.scores;
    }
    let order = ranked_by(n, &bounds.lb);
    Ok(TopKResult {
        entries: entries_for(&order[..k], &last_scores),
        delta_final: *schedule.last().unwrap(),
        iterations,
        walks,
        pushes,
        certified: false,
    })
}

/// Fast top-k. Each iteration runs the estimator at relative error `eps/2`
/// and failure budget `p_f / (n log2(n/k))`, stopping as soon as the k-th
/// largest estimate reaches `(1 + eps) * delta`; the final iteration at
/// `delta = 1/n` returns regardless, where the whole-graph guarantee
/// applies.
pub fn topk_fast(
    g: &Graph,
    estimator: &Estimator,
    source: NodeId,
    k: usize,
    params: &QueryParams,
) -> Result<TopKResult> {
    let n = g.node_count();
    check_k(n, k)?;
    let p_f_prime = params.p_f / (n as f64 * (n as f64 / k as f64).log2().max(1.0));
    let eps_run = params.epsilon / 2.0;
    let mut walks = 0u64;
    let mut pushes = 0u64;
    let schedule = delta_schedule(n, k);
    for (i, &delta) in schedule.iter().enumerate() {
        let run = estimator.run(g, source, params.alpha, eps_run, delta, p_f_prime)?;
        walks += run.walks;
        pushes += run.pushes;
        let order = ranked_by(n, &run.scores);
        let kth = run.scores[order[k - 1] as usize];
        if kth >= (1.0 + params.epsilon) * delta || i + 1 == schedule.len() {
            return Ok(TopKResult {
                entries: entries_for(&order[..k], &run.scores),
                delta_final: delta,
                iterations: i as u32 + 1,
                walks,
                pushes,
                certified: true,
            });
        }
    }
    unreachable!("schedule is never empty")
}

/// Fast top-k over the pure Monte-Carlo estimator.
pub fn mc_topk(
    g: &Graph,
    source: NodeId,
    k: usize,
    params: &QueryParams,
    rng: &WalkRng,
) -> Result<TopKResult> {
    topk_fast(g, &Estimator::MonteCarlo { rng: *rng }, source, k, params)
}
