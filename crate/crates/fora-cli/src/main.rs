//! Command-line front end: graph generation, whole-graph and top-k PPR
//! queries, global PageRank, walk-index management, and the evaluation and
//! benchmark batteries.
//!
//! Exit codes: 0 ok, 2 usage, 3 I/O, 4 format/compatibility, 5 internal
//! invariant violation.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fora::eval::{audit_relative_error, exact_ppr, ndcg_at_k, precision_at_k};
use fora::gen;
use fora::graph::{Graph, NodeId};
use fora::index::{build_index, load_index, query_with_index, save_index};
use fora::mc::mc_whole_graph;
use fora::params::QueryParams;
use fora::query::{
    choose_r_max, global_pagerank, whole_graph_balanced, whole_graph_basic, PprEstimate,
};
use fora::topk::{topk_bound_refine, topk_fast, Estimator, TopKResult};
use fora::walks::WalkRng;
use fora::ForaError;

#[derive(Parser)]
#[command(
    name = "fora",
    version,
    about = "Approximate personalized PageRank queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file: one "src dst" pair per line; '#'/'%' lines ignored.
    #[arg(long)]
    graph: PathBuf,
    /// Treat each input edge as two directed edges.
    #[arg(long)]
    undirected: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph, ForaError> {
        Graph::load_edge_list(&self.graph, self.undirected)
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Walk termination probability.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Relative error bound.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// PPR threshold above which the guarantee applies (default 1/n).
    #[arg(long)]
    delta: Option<f64>,
    /// Failure probability (default 1/n).
    #[arg(long)]
    pf: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, n: usize) -> Result<QueryParams, ForaError> {
        let inv_n = 1.0 / n as f64;
        QueryParams::new(
            self.alpha,
            self.epsilon,
            self.delta.unwrap_or(inv_n),
            self.pf.unwrap_or(inv_n),
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Balanced push/walk whole-graph query with zero-hop pruning.
    Fora,
    /// Whole-graph query served from a precomputed-walk index.
    ForaPlus,
    /// Plain push-then-walk whole-graph query.
    ForaBasic,
    /// Pure Monte-Carlo whole-graph baseline.
    Mc,
    /// Fast top-k over the Monte-Carlo estimator.
    McTopk,
    /// Top-k with iterative bound refinement.
    TopkRefine,
    /// Top-k with the k-th-estimate stopping rule.
    TopkFast,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Fora => "fora",
            Method::ForaPlus => "fora-plus",
            Method::ForaBasic => "fora-basic",
            Method::Mc => "mc",
            Method::McTopk => "mc-topk",
            Method::TopkRefine => "topk-refine",
            Method::TopkFast => "topk-fast",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    ErdosRenyi,
    BaPreferential,
    Star,
    Cycle,
    Path,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic benchmark graph as an edge list.
    Generate {
        #[arg(long, value_enum)]
        kind: GraphKind,
        #[arg(long)]
        nodes: u32,
        /// Edge count (erdos-renyi only; default 8n).
        #[arg(long)]
        edges: Option<u64>,
        /// Out-degree per attached node (ba-preferential only; default 5).
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whole-graph single-source PPR query; writes tab-separated "node score" rows
    /// sorted by descending score.
    Query {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        source: NodeId,
        #[arg(long, value_enum, default_value = "fora")]
        method: Method,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Walk index (required for --method fora-plus).
        #[arg(long)]
        index: Option<PathBuf>,
        /// Multiplier on the push threshold (fora-basic only).
        #[arg(long, default_value_t = 1.0)]
        rmax_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-k single-source PPR query; writes k TSV rows plus a JSON summary.
    Topk {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        source: NodeId,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "topk-fast")]
        method: Method,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Walk index (required for --method fora-plus; optional for the
        /// other top-k methods, which then read walks from it).
        #[arg(long)]
        index: Option<PathBuf>,
        /// Use zero-hop-pruned walks in the online estimator.
        #[arg(long)]
        zero_hop: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global PageRank via the uniform source distribution.
    Pagerank {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precompute per-node random-walk destinations.
    BuildIndex {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Multiplier on the default push threshold.
        #[arg(long, default_value_t = 1.0)]
        rmax_scale: f64,
        /// Store walks that skip the zero-hop outcome.
        #[arg(long)]
        zero_hop: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy battery against the power-iteration oracle; writes CSV.
    Eval {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "fora")]
        method: Method,
        /// Number of uniformly sampled source nodes.
        #[arg(long, default_value_t = 50)]
        sources: usize,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Oracle power-iteration rounds.
        #[arg(long, default_value_t = 100)]
        oracle_iters: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing and walk-count comparison across methods; writes CSV.
    Bench {
        #[command(flatten)]
        graph: GraphArgs,
        /// Methods to compare (default: fora, fora-basic, mc, plus
        /// fora-plus when an index is given).
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 20)]
        sources: usize,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &ForaError) -> i32 {
    match err {
        ForaError::Parse { .. }
        | ForaError::EmptyGraph(_)
        | ForaError::IndexFormat(_)
        | ForaError::IndexMismatch(_) => 4,
        ForaError::Io(_) => 3,
        ForaError::InvalidParameter { .. } | ForaError::UnnormalizedDistribution(_) => 2,
        ForaError::Invariant(_) => 5,
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), ForaError> {
    match path {
        Some(path) => std::fs::write(path, contents)?,
        None => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

/// All nodes as tab-separated "node score" rows, score descending, id ascending.
fn ranking_tsv(scores: &[f64]) -> String {
    let mut order: Vec<NodeId> = (0..scores.len() as NodeId).collect();
    order.sort_by(|&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    });
    let mut out = String::new();
    for v in order {
        out.push_str(&format!("{v}\t{}\n", scores[v as usize]));
    }
    out
}

fn entries_tsv(entries: &[(NodeId, f64)]) -> String {
    let mut out = String::new();
    for (v, score) in entries {
        out.push_str(&format!("{v}\t{score}\n"));
    }
    out
}

fn load_required_index(index: &Option<PathBuf>) -> Result<fora::WalkIndex, ForaError> {
    match index {
        Some(path) => load_index(path),
        None => Err(ForaError::InvalidParameter {
            name: "index",
            value: f64::NAN,
            expected: "--index is required for this method",
        }),
    }
}

fn check_source(g: &Graph, source: NodeId) -> Result<(), ForaError> {
    if (source as usize) < g.node_count() {
        Ok(())
    } else {
        Err(ForaError::InvalidParameter {
            name: "source",
            value: source as f64,
            expected: "a node id inside the graph",
        })
    }
}

fn run(command: Command) -> Result<(), ForaError> {
    match command {
        Command::Generate {
            kind,
            nodes,
            edges,
            degree,
            seed,
            out,
        } => {
            let edge_list = match kind {
                GraphKind::Cycle => gen::cycle_edges(nodes),
                GraphKind::Path => gen::path_edges(nodes),
                GraphKind::Star => gen::star_edges(nodes),
                GraphKind::ErdosRenyi => {
                    gen::erdos_renyi_edges(nodes, edges.unwrap_or(8 * nodes as u64), seed)
                }
                GraphKind::BaPreferential => {
                    gen::preferential_attachment_edges(nodes, degree.unwrap_or(5), seed)
                }
            };
            write_output(out.as_deref(), &gen::edges_to_text(&edge_list))
        }
        Command::Query {
            graph,
            source,
            method,
            params,
            seed,
            index,
            rmax_scale,
            out,
        } => {
            let g = graph.load()?;
            check_source(&g, source)?;
            let p = params.resolve(g.node_count())?;
            let rng = WalkRng::new(seed);
            let est = match method {
                Method::Fora => whole_graph_balanced(&g, source, &p, &rng),
                Method::ForaBasic => {
                    let r_max = choose_r_max(&g, &p) * rmax_scale;
                    whole_graph_basic(&g, source, &p, r_max, &rng)
                }
                Method::ForaPlus => {
                    let idx = load_required_index(&index)?;
                    query_with_index(&g, &idx, source, &p)?
                }
                Method::Mc => mc_whole_graph(&g, source, &p, &rng),
                _ => {
                    return Err(ForaError::InvalidParameter {
                        name: "method",
                        value: f64::NAN,
                        expected: "one of fora, fora-plus, fora-basic, mc for query",
                    })
                }
            };
            write_output(out.as_deref(), &ranking_tsv(&est.scores))
        }
        Command::Topk {
            graph,
            source,
            k,
            method,
            params,
            seed,
            index,
            zero_hop,
            out,
        } => {
            let g = graph.load()?;
            check_source(&g, source)?;
            let p = params.resolve(g.node_count())?;
            let idx = match &index {
                Some(path) => Some(load_index(path)?),
                None => None,
            };
            let result = run_topk(&g, source, k, method, &p, seed, idx.as_ref(), zero_hop)?;
            let summary = serde_json::json!({
                "delta_final": result.delta_final,
                "iterations": result.iterations,
                "walks": result.walks,
                "pushes": result.pushes,
                "certified": result.certified,
            })
            .to_string();
            match out.as_deref() {
                Some(path) => {
                    write_output(Some(path), &entries_tsv(&result.entries))?;
                    let mut summary_path = path.as_os_str().to_owned();
                    summary_path.push(".summary.json");
                    std::fs::write(PathBuf::from(summary_path), summary)?;
                }
                None => {
                    write_output(None, &entries_tsv(&result.entries))?;
                    eprintln!("{summary}");
                }
            }
            Ok(())
        }
        Command::Pagerank {
            graph,
            params,
            seed,
            out,
        } => {
            let g = graph.load()?;
            let p = params.resolve(g.node_count())?;
            let est = global_pagerank(&g, &p, &WalkRng::new(seed))?;
            write_output(out.as_deref(), &ranking_tsv(&est.scores))
        }
        Command::BuildIndex {
            graph,
            params,
            rmax_scale,
            zero_hop,
            seed,
            out,
        } => {
            let g = graph.load()?;
            let p = params.resolve(g.node_count())?;
            let r_max = choose_r_max(&g, &p) * rmax_scale;
            let idx = build_index(&g, &p, r_max, seed, zero_hop);
            save_index(&idx, &out)?;
            eprintln!(
                "built index: n={} m={} r_max={} zero_hop={} stored_walks={}",
                g.node_count(),
                g.edge_count(),
                r_max,
                zero_hop,
                idx.len()
            );
            Ok(())
        }
        Command::Eval {
            graph,
            method,
            sources,
            params,
            seed,
            index,
            oracle_iters,
            out,
        } => {
            let g = graph.load()?;
            let p = params.resolve(g.node_count())?;
            let csv = eval_battery(&g, method, sources, &p, seed, &index, oracle_iters)?;
            write_output(out.as_deref(), &csv)
        }
        Command::Bench {
            graph,
            methods,
            sources,
            params,
            seed,
            index,
            out,
        } => {
            let g = graph.load()?;
            let p = params.resolve(g.node_count())?;
            let methods = if methods.is_empty() {
                let mut m = vec![Method::Fora, Method::ForaBasic, Method::Mc];
                if index.is_some() {
                    m.push(Method::ForaPlus);
                }
                m
            } else {
                methods
            };
            let csv = bench_battery(&g, &methods, sources, &p, seed, &index)?;
            write_output(out.as_deref(), &csv)
        }
    }
}

fn topk_estimator<'a>(
    method: Method,
    seed: u64,
    index: Option<&'a fora::WalkIndex>,
    zero_hop: bool,
) -> Result<Estimator<'a>, ForaError> {
    let rng = WalkRng::new(seed);
    Ok(match method {
        Method::Fora | Method::ForaBasic | Method::TopkFast | Method::TopkRefine => match index {
            Some(index) => Estimator::ForaPlus { index },
            None => Estimator::Fora { rng, zero_hop },
        },
        Method::ForaPlus => Estimator::ForaPlus {
            index: index.ok_or(ForaError::InvalidParameter {
                name: "index",
                value: f64::NAN,
                expected: "--index is required for fora-plus",
            })?,
        },
        Method::Mc | Method::McTopk => Estimator::MonteCarlo { rng },
    })
}

#[allow(clippy::too_many_arguments)]
fn run_topk(
    g: &Graph,
    source: NodeId,
    k: usize,
    method: Method,
    p: &QueryParams,
    seed: u64,
    index: Option<&fora::WalkIndex>,
    zero_hop: bool,
) -> Result<TopKResult, ForaError> {
    let estimator = topk_estimator(method, seed, index, zero_hop)?;
    match method {
        Method::TopkRefine => topk_bound_refine(g, &estimator, source, k, p),
        _ => topk_fast(g, &estimator, source, k, p),
    }
}

/// k values evaluated by the battery, scaled down for small graphs.
fn k_menu(n: usize) -> Vec<usize> {
    let menu: Vec<usize> = if n <= 2000 {
        vec![10, 20, 30, 40, 50]
    } else {
        vec![100, 200, 300, 400, 500]
    };
    menu.into_iter().filter(|&k| k <= n).collect()
}

fn sample_sources(g: &Graph, count: usize, seed: u64) -> Vec<NodeId> {
    let mut stream = WalkRng::new(seed).stream(u32::MAX, 2);
    (0..count)
        .map(|_| stream.next_below(g.node_count() as u32))
        .collect()
}

struct EvalRow {
    query_id: usize,
    k: usize,
    precision: f64,
    ndcg: f64,
    violations: usize,
    violation_fraction: f64,
    walks: u64,
    pushes: u64,
}

fn is_topk_method(method: Method) -> bool {
    matches!(
        method,
        Method::McTopk | Method::TopkRefine | Method::TopkFast
    )
}

fn eval_battery(
    g: &Graph,
    method: Method,
    sources: usize,
    p: &QueryParams,
    seed: u64,
    index: &Option<PathBuf>,
    oracle_iters: u32,
) -> Result<String, ForaError> {
    let picks = sample_sources(g, sources, seed);
    let ks = k_menu(g.node_count());
    let idx = match index {
        Some(path) => Some(load_index(path)?),
        None => None,
    };
    let rows: Result<Vec<Vec<EvalRow>>, ForaError> = picks
        .par_iter()
        .enumerate()
        .map(|(q, &source)| {
            let exact = exact_ppr(g, source, p.alpha, oracle_iters, 1e-12);
            let per_query_seed = seed.wrapping_add(q as u64);
            let mut rows = Vec::new();
            if is_topk_method(method) {
                for &k in &ks {
                    let result =
                        run_topk(g, source, k, method, p, per_query_seed, idx.as_ref(), false)?;
                    let returned: Vec<NodeId> = result.entries.iter().map(|e| e.0).collect();
                    let mut violations = 0usize;
                    let mut eligible = 0usize;
                    for &(v, est) in &result.entries {
                        let pi = exact.scores[v as usize];
                        if pi > p.delta {
                            eligible += 1;
                            if (pi - est).abs() > p.epsilon * pi {
                                violations += 1;
                            }
                        }
                    }
                    rows.push(EvalRow {
                        query_id: q,
                        k,
                        precision: precision_at_k(&returned, &exact, k),
                        ndcg: ndcg_at_k(&returned, &exact, k),
                        violations,
                        violation_fraction: if eligible == 0 {
                            0.0
                        } else {
                            violations as f64 / eligible as f64
                        },
                        walks: result.walks,
                        pushes: result.pushes,
                    });
                }
            } else {
                let est = run_whole_graph_method(g, source, method, p, per_query_seed, &idx)?;
                let audit = audit_relative_error(&est, &exact, p);
                let mut order: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
                order.sort_by(|&a, &b| {
                    est.scores[b as usize]
                        .total_cmp(&est.scores[a as usize])
                        .then(a.cmp(&b))
                });
                for &k in &ks {
                    rows.push(EvalRow {
                        query_id: q,
                        k,
                        precision: precision_at_k(&order[..k], &exact, k),
                        ndcg: ndcg_at_k(&order[..k], &exact, k),
                        violations: audit.count,
                        violation_fraction: audit.fraction(),
                        walks: est.walks_issued,
                        pushes: est.pushes,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut csv = String::from(
        "query_id,method,k,precision,ndcg,violations,walks,pushes,violation_fraction\n",
    );
    for group in rows? {
        for r in group {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.query_id,
                method.name(),
                r.k,
                r.precision,
                r.ndcg,
                r.violations,
                r.walks,
                r.pushes,
                r.violation_fraction
            ));
        }
    }
    Ok(csv)
}

fn run_whole_graph_method(
    g: &Graph,
    source: NodeId,
    method: Method,
    p: &QueryParams,
    seed: u64,
    idx: &Option<fora::WalkIndex>,
) -> Result<PprEstimate, ForaError> {
    let rng = WalkRng::new(seed);
    match method {
        Method::Fora => Ok(whole_graph_balanced(g, source, p, &rng)),
        Method::ForaBasic => Ok(whole_graph_basic(g, source, p, choose_r_max(g, p), &rng)),
        Method::Mc => Ok(mc_whole_graph(g, source, p, &rng)),
        Method::ForaPlus => match idx {
            Some(idx) => query_with_index(g, idx, source, p),
            None => Err(ForaError::InvalidParameter {
                name: "index",
                value: f64::NAN,
                expected: "--index is required for fora-plus",
            }),
        },
        _ => Err(ForaError::InvalidParameter {
            name: "method",
            value: f64::NAN,
            expected: "a whole-graph method (fora, fora-plus, fora-basic, mc)",
        }),
    }
}

fn bench_battery(
    g: &Graph,
    methods: &[Method],
    sources: usize,
    p: &QueryParams,
    seed: u64,
    index: &Option<PathBuf>,
) -> Result<String, ForaError> {
    let picks = sample_sources(g, sources, seed);
    let idx = match index {
        Some(path) => Some(load_index(path)?),
        None => None,
    };
    let mut csv =
        String::from("method,queries,mean_ms,median_ms,mean_walks,median_walks,mean_pushes\n");
    for &method in methods {
        let mut times = Vec::with_capacity(picks.len());
        let mut walks = Vec::with_capacity(picks.len());
        let mut pushes = Vec::with_capacity(picks.len());
        for (q, &source) in picks.iter().enumerate() {
            let started = Instant::now();
            let est =
                run_whole_graph_method(g, source, method, p, seed.wrapping_add(q as u64), &idx)?;
            times.push(started.elapsed().as_secs_f64() * 1e3);
            walks.push(est.walks_issued);
            pushes.push(est.pushes);
        }
        times.sort_by(f64::total_cmp);
        walks.sort_unstable();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
        csv.push_str(&format!(
            "{},{},{:.4},{:.4},{:.1},{},{:.1}\n",
            method.name(),
            picks.len(),
            mean(&times),
            times[times.len() / 2],
            walks.iter().sum::<u64>() as f64 / walks.len().max(1) as f64,
            walks[walks.len() / 2],
            pushes.iter().sum::<u64>() as f64 / pushes.len().max(1) as f64,
        ));
    }
    Ok(csv)
}
