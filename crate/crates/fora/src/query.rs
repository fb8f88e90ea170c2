//! Whole-graph SSPPR estimators: forward push followed by just enough
//! random walks to certify the relative-error guarantee.
//!
//! The walk budget is `omega = r_sum * (2e/3 + 2) * ln(2/p_f) / (e^2 * d)`
//! where `r_sum` is the residue mass left by the push; each node with
//! residue `r` issues `ceil(r * omega / r_sum)` walks whose terminals each
//! receive `r / ceil(...)` mass. The per-node totals then sum back to
//! exactly the initial mass, so every estimate is a probability
//! distribution.

use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::index::WalkIndex;
use crate::params::QueryParams;
use crate::push::{forward_push, forward_push_budgeted, forward_push_from_distribution, PushState};
use crate::walks::{random_walk, random_walk_skip_zero_hop, WalkRng};

/// Estimated PPR vector from one whole-graph query.
#[derive(Debug, Clone, PartialEq)]
pub struct PprEstimate {
    pub scores: Vec<f64>,
    pub walks_issued: u64,
    /// Total push cost in edge units.
    pub pushes: u64,
}

/// `(2*epsilon/3 + 2) * ln(2/p_f)`: the constant of the concentration bound.
#[inline]
pub(crate) fn walk_constant(epsilon: f64, p_f: f64) -> f64 {
    (2.0 * epsilon / 3.0 + 2.0) * (2.0 / p_f).ln()
}

/// Walks required per unit of residue mass: `omega = r_sum * walk_factor`.
#[inline]
pub(crate) fn walk_factor(epsilon: f64, delta: f64, p_f: f64) -> f64 {
    walk_constant(epsilon, p_f) / (epsilon * epsilon * delta)
}

/// Push threshold balancing push cost `1/r_max` against walk cost
/// `m * r_max * walk_factor`, with the second branch taking over when the
/// optimum is no longer binding because `r_sum <= 1` always holds.
pub(crate) fn r_max_for(m: usize, epsilon: f64, delta: f64, p_f: f64) -> f64 {
    let c = walk_constant(epsilon, p_f);
    let balanced = (epsilon / (m as f64).sqrt()) * (delta / c).sqrt();
    if m as f64 * balanced > 1.0 {
        epsilon * epsilon * delta / c
    } else {
        balanced
    }
}

/// Residue threshold for a query on `g` with the given parameters.
pub fn choose_r_max(g: &Graph, params: &QueryParams) -> f64 {
    r_max_for(g.edge_count(), params.epsilon, params.delta, params.p_f)
}

/// Where walk terminals come from: generated on the fly from keyed streams,
/// or read from a prebuilt index (which stored terminals of the same keyed
/// streams, making the two modes bit-identical).
pub(crate) enum WalkSource<'a> {
    Seeded(WalkRng),
    Indexed {
        index: &'a WalkIndex,
        /// When set, running past a node's stored walks is an internal
        /// invariant violation instead of falling back to generation.
        strict: bool,
    },
}

impl WalkSource<'_> {
    #[inline]
    fn terminal(&self, g: &Graph, alpha: f64, zero_hop: bool, v: NodeId, j: u64) -> Result<NodeId> {
        match self {
            WalkSource::Seeded(rng) => {
                let mut stream = rng.stream(v, j);
                Ok(if zero_hop {
                    random_walk_skip_zero_hop(g, v, alpha, &mut stream)
                } else {
                    random_walk(g, v, alpha, &mut stream)
                })
            }
            WalkSource::Indexed { index, strict } => index.terminal(g, v, j, *strict),
        }
    }
}

/// Result of the walk phase, with the deterministic part kept separate for
/// the top-k confidence bounds.
pub(crate) struct WalkPhaseOutput {
    pub scores: Vec<f64>,
    /// Deterministic portion of `scores` (reserves, plus `alpha * residue`
    /// in zero-hop mode); a lower bound on the true PPR.
    pub base: Vec<f64>,
    pub walks: u64,
    /// Real-valued walk budget, for the concentration-bound machinery.
    pub omega: f64,
    /// Residue mass the walks compensate for ((1 - alpha)-scaled in
    /// zero-hop mode).
    pub walk_r_sum: f64,
}

/// Converts a push state into estimates. In zero-hop mode the alpha portion
/// of each residue is settled analytically and the remaining (1 - alpha)
/// portion is covered by walks that skip the zero-hop outcome.
pub(crate) fn walk_phase(
    g: &Graph,
    push: &PushState,
    alpha: f64,
    factor: f64,
    zero_hop: bool,
    source: &WalkSource,
) -> Result<WalkPhaseOutput> {
    let mut base = push.reserves().to_vec();
    if zero_hop {
        for &v in push.touched() {
            base[v as usize] += alpha * push.residue(v);
        }
    }
    let mut scores = base.clone();
    let scale = if zero_hop { 1.0 - alpha } else { 1.0 };
    let walk_r_sum = (scale * push.r_sum()).max(0.0);
    let mut walks = 0u64;
    for (v, r) in push.residue_nodes() {
        let r_scaled = scale * r;
        let need = r_scaled * factor;
        if need <= 0.0 {
            continue;
        }
        let count = need.ceil() as u64;
        let increment = r_scaled / count as f64;
        for j in 0..count {
            let t = source.terminal(g, alpha, zero_hop, v, j)?;
            scores[t as usize] += increment;
        }
        walks += count;
    }
    #[cfg(debug_assertions)]
    {
        let total: f64 = scores.iter().sum();
        debug_assert!(
            (total - push.initial_mass()).abs() <= 1e-9,
            "estimate total {total} deviates from initial mass {}",
            push.initial_mass()
        );
    }
    Ok(WalkPhaseOutput {
        scores,
        base,
        walks,
        omega: walk_r_sum * factor,
        walk_r_sum,
    })
}

pub(crate) struct WholeGraphRun {
    pub output: WalkPhaseOutput,
    pub pushes: u64,
}

/// Push-then-walk pipeline shared by the online, indexed, and distribution
/// queries.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_whole_graph(
    g: &Graph,
    seeds: &[(NodeId, f64)],
    alpha: f64,
    epsilon: f64,
    delta: f64,
    p_f: f64,
    r_max: f64,
    zero_hop: bool,
    source: &WalkSource,
) -> Result<WholeGraphRun> {
    let push = if seeds.len() == 1 && seeds[0].1 == 1.0 {
        forward_push(g, seeds[0].0, alpha, r_max)
    } else {
        forward_push_from_distribution(g, seeds, alpha, r_max)?
    };
    let factor = walk_factor(epsilon, delta, p_f);
    let output = walk_phase(g, &push, alpha, factor, zero_hop, source)?;
    Ok(WholeGraphRun {
        output,
        pushes: push.pushes(),
    })
}

fn into_estimate(run: WholeGraphRun) -> PprEstimate {
    PprEstimate {
        scores: run.output.scores,
        walks_issued: run.output.walks,
        pushes: run.pushes,
    }
}

/// Basic whole-graph query: plain forward push at `r_max`, then compensating
/// random walks. If the push drains every residue, no walks are issued and
/// the reserves are returned as-is.
pub fn whole_graph_basic(
    g: &Graph,
    source: NodeId,
    params: &QueryParams,
    r_max: f64,
    rng: &WalkRng,
) -> PprEstimate {
    let run = run_whole_graph(
        g,
        &[(source, 1.0)],
        params.alpha,
        params.epsilon,
        params.delta,
        params.p_f,
        r_max,
        false,
        &WalkSource::Seeded(*rng),
    )
    .expect("seeded whole-graph run cannot fail");
    into_estimate(run)
}

/// Optimized whole-graph query: the push additionally stops once its
/// accumulated cost reaches the estimated cost of the walks the current
/// residue still requires, the alpha portion of every leftover residue is
/// settled analytically, and the walks skip the zero-hop outcome.
pub fn whole_graph_balanced(
    g: &Graph,
    source: NodeId,
    params: &QueryParams,
    rng: &WalkRng,
) -> PprEstimate {
    let r_max = choose_r_max(g, params);
    let factor = walk_factor(params.epsilon, params.delta, params.p_f);
    let alpha = params.alpha;
    let walk_cost = 1.0 / alpha; // expected edges per walk
    let push = forward_push_budgeted(
        g,
        source,
        alpha,
        r_max,
        |r_sum| (1.0 - alpha) * r_sum * factor,
        walk_cost,
        |fc, limit| (fc as f64) < limit,
    );
    let output = walk_phase(g, &push, alpha, factor, true, &WalkSource::Seeded(*rng))
        .expect("seeded walk phase cannot fail");
    PprEstimate {
        scores: output.scores,
        walks_issued: output.walks,
        pushes: push.pushes(),
    }
}

/// Whole-graph query from a source distribution `sigma`.
pub fn ppr_from_distribution(
    g: &Graph,
    sigma: &[(NodeId, f64)],
    params: &QueryParams,
    r_max: f64,
    rng: &WalkRng,
) -> Result<PprEstimate> {
    let run = run_whole_graph(
        g,
        sigma,
        params.alpha,
        params.epsilon,
        params.delta,
        params.p_f,
        r_max,
        false,
        &WalkSource::Seeded(*rng),
    )?;
    Ok(into_estimate(run))
}

/// Global PageRank as PPR from the uniform source distribution.
pub fn global_pagerank(g: &Graph, params: &QueryParams, rng: &WalkRng) -> Result<PprEstimate> {
    let n = g.node_count();
    let p = 1.0 / n as f64;
    let sigma: Vec<(NodeId, f64)> = (0..n as NodeId).map(|v| (v, p)).collect();
    let r_max = choose_r_max(g, params);
    ppr_from_distribution(g, &sigma, params, r_max, rng)
}
