//! Approximate single-source personalized PageRank combining forward push
//! with compensating random walks, plus a precomputed-walk index, top-k
//! query algorithms with probabilistic guarantees, and an exact-oracle
//! evaluation harness.
//!
//! For every node whose true PPR exceeds `delta`, the whole-graph estimate
//! is within relative error `epsilon` with probability at least `1 - p_f`.
//! All randomness flows through counter-based streams keyed by
//! `(seed, node, walk index)`, so every query is reproducible and
//! index-served queries are bit-identical to their online counterparts.
//!
//! ```
//! use fora::{choose_r_max, whole_graph_basic, Graph, QueryParams, WalkRng};
//!
//! let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 0), (1, 0)], false)?;
//! let params = QueryParams::new(0.2, 0.5, 0.05, 0.05)?;
//! let r_max = choose_r_max(&g, &params);
//! let est = whole_graph_basic(&g, 0, &params, r_max, &WalkRng::new(42));
//! let total: f64 = est.scores.iter().sum();
//! assert!((total - 1.0).abs() < 1e-9);
//! # Ok::<(), fora::ForaError>(())
//! ```

pub mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod index;
pub mod mc;
pub mod params;
pub mod push;
pub mod query;
pub mod topk;
pub mod walks;

pub use error::{ForaError, Result};
pub use eval::{
    audit_relative_error, exact_ppr, ndcg_at_k, power_iteration, precision_at_k, ExactPpr,
};
pub use graph::{Graph, NodeId};
pub use index::{build_index, load_index, omega_max, query_with_index, save_index, WalkIndex};
pub use mc::mc_whole_graph;
pub use params::QueryParams;
pub use push::{forward_push, forward_push_budgeted, forward_push_from_distribution, PushState};
pub use query::{
    choose_r_max, global_pagerank, ppr_from_distribution, whole_graph_balanced, whole_graph_basic,
    PprEstimate,
};
pub use topk::{mc_topk, topk_bound_refine, topk_fast, BoundState, Estimator, TopKResult};
pub use walks::{random_walk, random_walk_skip_zero_hop, WalkRng, WalkStream};
