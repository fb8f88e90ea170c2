//! Precomputed-walk index: for every node, the terminals of its first
//! `omega_max(v)` keyed random walks, persisted bit-exactly. A query served
//! from the index consumes per-node prefixes instead of simulating walks and
//! returns exactly what the online query with the same seed would.
//!
//! The index stores walk destinations only; push results are recomputed per
//! query, as storing them per source would cost far more space than the
//! walks do.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{ForaError, Result};
use crate::graph::{Graph, NodeId};
use crate::params::QueryParams;
use crate::query::{run_whole_graph, walk_factor, PprEstimate, WalkSource};
use crate::walks::{random_walk, random_walk_skip_zero_hop, WalkRng};

const MAGIC: &[u8; 8] = b"FORAIDX1";
const VERSION: u32 = 1;

/// Parameters an index was built with; queries must match them.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMeta {
    pub n: u64,
    pub m: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub p_f: f64,
    pub r_max: f64,
    pub seed: u64,
    pub zero_hop: bool,
}

/// Per-node precomputed walk terminals in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkIndex {
    meta: IndexMeta,
    offsets: Vec<u64>,
    destinations: Vec<u32>,
}

/// Walk-count ceiling that snaps values within a 1e-9 relative band of an
/// integer to that integer. The residue-capped threshold makes
/// `out_degree * r_max * walk_factor` land exactly on `out_degree` up to
/// float noise, and the snap keeps the stored count at `out_degree` rather
/// than one above it.
fn index_walk_count(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let r = x.round();
    // Snapping to zero would under-provision a node a query still walks.
    if r >= 1.0 && (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Walks to precompute for `v`: the residue after a push is at most
/// `out_degree(v) * r_max`, so no query at these parameters asks for more
/// than `ceil(out_degree(v) * r_max * walk_factor)` walks from `v`. Zero-hop
/// indexes store a (1 - alpha) fraction of that.
pub fn omega_max(g: &Graph, v: NodeId, params: &QueryParams, r_max: f64, zero_hop: bool) -> u64 {
    let factor = walk_factor(params.epsilon, params.delta, params.p_f);
    let scale = if zero_hop { 1.0 - params.alpha } else { 1.0 };
    index_walk_count(g.out_degree(v) as f64 * r_max * factor * scale)
}

/// Builds the index by running every node's keyed walk streams. Per-node
/// slices are independent, so generation is parallel and still
/// deterministic.
pub fn build_index(
    g: &Graph,
    params: &QueryParams,
    r_max: f64,
    seed: u64,
    zero_hop: bool,
) -> WalkIndex {
    assert!(g.node_count() <= u32::MAX as usize, "node ids must fit u32");
    let n = g.node_count();
    let rng = WalkRng::new(seed);
    let alpha = params.alpha;
    let slices: Vec<Vec<u32>> = (0..n as NodeId)
        .into_par_iter()
        .map(|v| {
            let count = omega_max(g, v, params, r_max, zero_hop);
            (0..count)
                .map(|j| {
                    let mut stream = rng.stream(v, j);
                    if zero_hop {
                        random_walk_skip_zero_hop(g, v, alpha, &mut stream)
                    } else {
                        random_walk(g, v, alpha, &mut stream)
                    }
                })
                .collect()
        })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0u64);
    let mut total = 0u64;
    for slice in &slices {
        total += slice.len() as u64;
        offsets.push(total);
    }
    let mut destinations = Vec::with_capacity(total as usize);
    for slice in slices {
        destinations.extend(slice);
    }
    WalkIndex {
        meta: IndexMeta {
            n: n as u64,
            m: g.edge_count() as u64,
            alpha,
            epsilon: params.epsilon,
            delta: params.delta,
            p_f: params.p_f,
            r_max,
            seed,
            zero_hop,
        },
        offsets,
        destinations,
    }
}

impl WalkIndex {
    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    /// Total stored walk terminals.
    pub fn len(&self) -> usize {
        self.destinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.destinations.is_empty()
    }

    pub fn stored_walks(&self, v: NodeId) -> u64 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Terminal of walk `j` from `v`. Stored walks are read back; beyond the
    /// stored prefix, `strict` mode reports an invariant violation (a
    /// matching-parameter query can never get there) while non-strict mode
    /// regenerates the walk from the same keyed stream, which by
    /// construction returns the value an index with more capacity would
    /// have stored.
    pub(crate) fn terminal(&self, g: &Graph, v: NodeId, j: u64, strict: bool) -> Result<NodeId> {
        let lo = self.offsets[v as usize];
        let hi = self.offsets[v as usize + 1];
        if j < hi - lo {
            return Ok(self.destinations[(lo + j) as usize]);
        }
        if strict {
            return Err(ForaError::Invariant(format!(
                "index prefix exhausted at node {v}: walk {j} requested, {} stored",
                hi - lo
            )));
        }
        let mut stream = WalkRng::new(self.meta.seed).stream(v, j);
        Ok(if self.meta.zero_hop {
            random_walk_skip_zero_hop(g, v, self.meta.alpha, &mut stream)
        } else {
            random_walk(g, v, self.meta.alpha, &mut stream)
        })
    }

    /// Checks that the index fits the query's graph and parameters.
    pub fn check_compatible(&self, g: &Graph, params: &QueryParams) -> Result<()> {
        self.check_graph(g)?;
        let m = &self.meta;
        let same = |a: f64, b: f64| a == b;
        if !(same(m.alpha, params.alpha)
            && same(m.epsilon, params.epsilon)
            && same(m.delta, params.delta)
            && same(m.p_f, params.p_f))
        {
            return Err(ForaError::IndexMismatch(format!(
                "index built for alpha={} epsilon={} delta={} p_f={}, \
                 query uses alpha={} epsilon={} delta={} p_f={}",
                m.alpha,
                m.epsilon,
                m.delta,
                m.p_f,
                params.alpha,
                params.epsilon,
                params.delta,
                params.p_f
            )));
        }
        Ok(())
    }

    /// Graph-shape compatibility only (n, m); used by callers that re-derive
    /// per-iteration parameters but reuse the stored walks.
    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.meta.n != g.node_count() as u64 || self.meta.m != g.edge_count() as u64 {
            return Err(ForaError::IndexMismatch(format!(
                "index built for n={} m={}, graph has n={} m={}",
                self.meta.n,
                self.meta.m,
                g.node_count(),
                g.edge_count()
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(
            8 + 4
                + 8 * 2
                + 8 * 5
                + 8
                + 1
                + self.offsets.len() * 8
                + self.destinations.len() * 4
                + 4,
        );
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.meta.n.to_le_bytes());
        buf.extend_from_slice(&self.meta.m.to_le_bytes());
        for x in [
            self.meta.alpha,
            self.meta.epsilon,
            self.meta.delta,
            self.meta.p_f,
            self.meta.r_max,
        ] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf.extend_from_slice(&self.meta.seed.to_le_bytes());
        buf.push(self.meta.zero_hop as u8);
        for o in &self.offsets {
            buf.extend_from_slice(&o.to_le_bytes());
        }
        for d in &self.destinations {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fail = |msg: &str| ForaError::IndexFormat(msg.to_string());
        if bytes.len() < 8 + 4 + 4 {
            return Err(fail("file truncated"));
        }
        let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
        let stored_crc = u32::from_le_bytes(crc_bytes.try_into().unwrap());
        if crc32fast::hash(body) != stored_crc {
            return Err(fail("checksum mismatch"));
        }
        let mut pos = 0usize;
        let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
            if *pos + len > body.len() {
                return Err(ForaError::IndexFormat("file truncated".into()));
            }
            let s = &body[*pos..*pos + len];
            *pos += len;
            Ok(s)
        };
        if take(&mut pos, 8)? != MAGIC {
            return Err(fail("bad magic"));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != VERSION {
            return Err(fail(&format!("unsupported version {version}")));
        }
        let read_u64 = |pos: &mut usize| -> Result<u64> {
            Ok(u64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
        };
        let read_f64 = |pos: &mut usize| -> Result<f64> {
            Ok(f64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
        };
        let n = read_u64(&mut pos)?;
        let m = read_u64(&mut pos)?;
        let alpha = read_f64(&mut pos)?;
        let epsilon = read_f64(&mut pos)?;
        let delta = read_f64(&mut pos)?;
        let p_f = read_f64(&mut pos)?;
        let r_max = read_f64(&mut pos)?;
        let seed = read_u64(&mut pos)?;
        let zero_hop = match take(&mut pos, 1)?[0] {
            0 => false,
            1 => true,
            other => return Err(fail(&format!("bad zero-hop byte {other}"))),
        };
        let mut offsets = Vec::with_capacity(n as usize + 1);
        for _ in 0..=n {
            offsets.push(read_u64(&mut pos)?);
        }
        if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(fail("offsets not non-decreasing from zero"));
        }
        let total = *offsets.last().unwrap() as usize;
        let mut destinations = Vec::with_capacity(total);
        for _ in 0..total {
            let d = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
            if d as u64 >= n {
                return Err(fail(&format!("destination {d} out of range")));
            }
            destinations.push(d);
        }
        if pos != body.len() {
            return Err(fail("trailing bytes"));
        }
        Ok(Self {
            meta: IndexMeta {
                n,
                m,
                alpha,
                epsilon,
                delta,
                p_f,
                r_max,
                seed,
                zero_hop,
            },
            offsets,
            destinations,
        })
    }
}

pub fn save_index(idx: &WalkIndex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, idx.to_bytes())?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<WalkIndex> {
    WalkIndex::from_bytes(&fs::read(path)?)
}

/// Whole-graph query answered from index prefixes. The computation is the
/// online query's, with each node's walk terminals read as the prefix of
/// its stored slice; since online walks use the same keyed streams, the
/// result is bit-identical to the online query run with the index's seed.
pub fn query_with_index(
    g: &Graph,
    idx: &WalkIndex,
    source: NodeId,
    params: &QueryParams,
) -> Result<PprEstimate> {
    idx.check_compatible(g, params)?;
    let m = idx.meta();
    let run = run_whole_graph(
        g,
        &[(source, 1.0)],
        m.alpha,
        m.epsilon,
        m.delta,
        m.p_f,
        m.r_max,
        m.zero_hop,
        &WalkSource::Indexed {
            index: idx,
            strict: true,
        },
    )?;
    Ok(PprEstimate {
        scores: run.output.scores,
        walks_issued: run.output.walks,
        pushes: run.pushes,
    })
}

/// Upper bound on stored terminals from the index-size analysis, for an
/// index built at `r_max`. In the residue-capped regime (per-edge walk
/// multiplier `r_max * walk_factor <= 1`) no node stores more than its
/// out-degree, giving `m + n`; in the balanced regime the analytic term
/// `n + sqrt(m)/(eps sqrt(delta)) * sqrt((2e/3+2) ln(2/p_f))` applies. The
/// two expressions are the two arms of the size lemma; each arm is valid
/// exactly for the threshold regime it was derived in.
pub fn index_size_bound(g: &Graph, params: &QueryParams, r_max: f64) -> f64 {
    let n = g.node_count() as f64;
    let m = g.edge_count() as f64;
    let c = crate::query::walk_constant(params.epsilon, params.p_f);
    let per_edge = r_max * walk_factor(params.epsilon, params.delta, params.p_f);
    if per_edge <= 1.0 + 1e-9 {
        m + n
    } else {
        n + m.sqrt() / (params.epsilon * params.delta.sqrt()) * c.sqrt() + n
    }
}
