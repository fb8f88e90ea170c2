//! Immutable directed graph in compressed adjacency (CSR) form.
//!
//! Only out-edges are stored: forward push and random walks never consult
//! in-neighbors. The graph is immutable after construction and safe to share
//! across threads.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ForaError, Result};

/// Node identifier. Ids are dense: a graph with max id `v` has `v + 1` nodes.
pub type NodeId = u32;

/// Directed graph with `n` nodes and `m` edges in CSR layout.
///
/// `offsets` has length `n + 1` with `offsets[0] == 0` and `offsets[n] == m`;
/// the out-neighbors of `v` are `targets[offsets[v]..offsets[v+1]]`.
/// Self-loops and parallel edges are kept as given; random-walk semantics are
/// well-defined over multisets of out-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Graph {
    /// Build a graph from an in-memory edge list. `n = max id + 1`; gaps in
    /// the id space become isolated (dangling) nodes. With `undirected`, each
    /// input edge yields both directions.
    pub fn from_edges(edges: &[(NodeId, NodeId)], undirected: bool) -> Result<Self> {
        if edges.is_empty() {
            return Err(ForaError::EmptyGraph("no edges".into()));
        }
        let max_id = edges
            .iter()
            .map(|&(u, v)| u.max(v))
            .max()
            .expect("non-empty");
        let n = max_id as usize + 1;

        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            degree[u as usize] += 1;
            if undirected {
                degree[v as usize] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let m = offsets[n];
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0 as NodeId; m];
        for &(u, v) in edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            if undirected {
                targets[cursor[v as usize]] = u;
                cursor[v as usize] += 1;
            }
        }
        Ok(Self { offsets, targets })
    }

    /// Load an edge-list text file: one `src dst` pair per line, whitespace
    /// separated. Lines starting with `#` or `%` and blank lines are ignored.
    /// An edge list with no edges is an error, not an empty graph.
    pub fn load_edge_list(path: impl AsRef<Path>, undirected: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let display = path.display().to_string();
        let mut edges = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<NodeId> {
                let tok = tok.ok_or_else(|| ForaError::Parse {
                    path: display.clone(),
                    line: idx + 1,
                    msg: "expected two node ids".into(),
                })?;
                tok.parse::<NodeId>().map_err(|e| ForaError::Parse {
                    path: display.clone(),
                    line: idx + 1,
                    msg: format!("bad node id {tok:?}: {e}"),
                })
            };
            let u = parse(tokens.next())?;
            let v = parse(tokens.next())?;
            if tokens.next().is_some() {
                return Err(ForaError::Parse {
                    path: display.clone(),
                    line: idx + 1,
                    msg: "expected exactly two tokens".into(),
                });
            }
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(ForaError::EmptyGraph(display));
        }
        Self::from_edges(&edges, undirected)
    }

    /// Render the graph back to edge-list text, one `src dst` line per stored
    /// edge in CSR order. Reloading the output (directed) reproduces `self`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.node_count() {
            for &v in self.out_neighbors(u as NodeId) {
                let _ = writeln!(out, "{u} {v}");
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Out-neighbors of `v` as a contiguous slice. `v` must be in range.
    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    #[inline]
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    #[inline]
    pub fn is_dangling(&self, v: NodeId) -> bool {
        self.out_degree(v) == 0
    }
}
