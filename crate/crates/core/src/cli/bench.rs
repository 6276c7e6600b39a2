//! Benchmark drivers: average time per add, delete, neighbourhood listing and
//! edge query, plus a static build baseline.
//!
//! Every driver loads its graph untimed (except `add` and `static`, where
//! loading is the measured operation) and times the whole operation loop with
//! a monotonic clock.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyngraph::{DynamicGraph, GraphStats, DEFAULT_ARITY, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::genmodel::read_edge_list;
use crate::k2tree::{Edge, K2Tree};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchConfig {
    pub epsilon: f64,
    pub k: usize,
    pub seed: u64,
    /// Fraction of edges (or vertices) sampled by `delete`, `list` and `query`.
    pub sample: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            k: DEFAULT_ARITY,
            seed: 0,
            sample: 0.5,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sample) {
            return Err(Error::InvalidConfig(format!(
                "sample fraction must be in [0, 1], got {}",
                self.sample
            )));
        }
        Ok(())
    }

    fn graph(&self) -> Result<DynamicGraph> {
        DynamicGraph::new(self.epsilon, self.k)
    }

    fn sample_size(&self, population: usize) -> usize {
        ((population as f64) * self.sample).floor() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchKind {
    Add,
    Delete,
    List,
    Query,
    Static,
}

impl BenchKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchKind::Add => "add",
            BenchKind::Delete => "delete",
            BenchKind::List => "list",
            BenchKind::Query => "query",
            BenchKind::Static => "static",
        }
    }
}

impl FromStr for BenchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "add" => BenchKind::Add,
            "delete" => BenchKind::Delete,
            "list" => BenchKind::List,
            "query" => BenchKind::Query,
            "static" => BenchKind::Static,
            _ => return Err(format!("unknown benchmark {s:?}")),
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub operation: &'static str,
    pub config: BenchConfig,
    pub op_count: u64,
    pub total: Duration,
    /// Operation-specific counts, e.g. how many removals succeeded.
    pub counts: Vec<(&'static str, u64)>,
    /// Final state of the dynamic graph; `None` for the static baseline.
    pub stats: Option<GraphStats>,
    pub serialized_bytes: u64,
}

impl BenchReport {
    pub fn mean_ns(&self) -> f64 {
        if self.op_count == 0 {
            0.0
        } else {
            self.total.as_nanos() as f64 / self.op_count as f64
        }
    }

    pub fn count(&self, key: &str) -> Option<u64> {
        self.counts.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operation={}", self.operation)?;
        writeln!(f, "epsilon={}", self.config.epsilon)?;
        writeln!(f, "k={}", self.config.k)?;
        writeln!(f, "seed={}", self.config.seed)?;
        writeln!(f, "sample={}", self.config.sample)?;
        writeln!(f, "op_count={}", self.op_count)?;
        writeln!(f, "total_ns={}", self.total.as_nanos())?;
        writeln!(f, "mean_ns={:.1}", self.mean_ns())?;
        for (k, v) in &self.counts {
            writeln!(f, "{k}={v}")?;
        }
        if let Some(stats) = &self.stats {
            for line in stats.to_string().lines() {
                // graph parameters are already echoed above
                if !line.starts_with("epsilon=") && !line.starts_with("k=") {
                    writeln!(f, "graph.{line}")?;
                }
            }
        }
        write!(f, "serialized_bytes={}", self.serialized_bytes)
    }
}

fn load(edges: &[Edge], cfg: &BenchConfig) -> Result<DynamicGraph> {
    let mut g = cfg.graph()?;
    for e in edges {
        g.add_edge(e.u, e.v)?;
    }
    Ok(g)
}

/// Distinct edges in first-occurrence order.
fn distinct(edges: &[Edge]) -> Vec<Edge> {
    let mut seen = HashSet::with_capacity(edges.len());
    edges.iter().copied().filter(|e| seen.insert(*e)).collect()
}

fn vertex_count(edges: &[Edge]) -> u64 {
    edges.iter().map(|e| e.u.max(e.v) + 1).max().unwrap_or(0)
}

fn report(
    operation: &'static str,
    cfg: &BenchConfig,
    op_count: usize,
    total: Duration,
    counts: Vec<(&'static str, u64)>,
    g: &DynamicGraph,
) -> BenchReport {
    BenchReport {
        operation,
        config: *cfg,
        op_count: op_count as u64,
        total,
        counts,
        stats: Some(g.stats()),
        serialized_bytes: g.save().len() as u64,
    }
}

/// Inserts all edges in file order. `op_count` counts attempts.
pub fn bench_add(edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    let mut g = cfg.graph()?;
    let mut inserted = 0u64;
    let start = Instant::now();
    for e in edges {
        inserted += u64::from(g.add_edge(e.u, e.v)?);
    }
    let total = start.elapsed();
    Ok(report(
        "add",
        cfg,
        edges.len(),
        total,
        vec![("inserted", inserted)],
        &g,
    ))
}

/// Loads all edges, then removes a seeded uniform sample of the distinct ones.
pub fn bench_delete(edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut g = load(edges, cfg)?;
    let pool = distinct(edges);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks: Vec<Edge> = index::sample(&mut rng, pool.len(), cfg.sample_size(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let mut removed = 0u64;
    let start = Instant::now();
    for e in &picks {
        removed += u64::from(g.remove_edge(e.u, e.v));
    }
    let total = start.elapsed();
    Ok(report(
        "delete",
        cfg,
        picks.len(),
        total,
        vec![("removed", removed)],
        &g,
    ))
}

/// Loads all edges, then lists the neighbourhoods of a sample of the vertices
/// `0..=max id`.
pub fn bench_list(edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let g = load(edges, cfg)?;
    let n = vertex_count(edges) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks: Vec<u64> = index::sample(&mut rng, n, cfg.sample_size(n))
        .into_iter()
        .map(|i| i as u64)
        .collect();
    let mut listed = 0u64;
    let start = Instant::now();
    for &u in &picks {
        listed += g.neighbors(u).len() as u64;
    }
    let total = start.elapsed();
    Ok(report(
        "list",
        cfg,
        picks.len(),
        total,
        vec![("listed", listed)],
        &g,
    ))
}

/// A sample of present edges followed by as many absent pairs, interleaved.
/// Each entry carries the expected answer.
pub fn query_plan(edges: &[Edge], cfg: &BenchConfig) -> Vec<(Edge, bool)> {
    let pool = distinct(edges);
    let set: HashSet<Edge> = pool.iter().copied().collect();
    let n = vertex_count(edges);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let present: Vec<Edge> = index::sample(&mut rng, pool.len(), cfg.sample_size(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let mut absent = Vec::with_capacity(present.len());
    let mut attempts = 0usize;
    while n > 0 && absent.len() < present.len() && attempts < 100 * present.len() {
        attempts += 1;
        let e = Edge::new(rng.gen_range(0..n), rng.gen_range(0..n));
        if !set.contains(&e) {
            absent.push(e);
        }
    }
    let mut plan = Vec::with_capacity(present.len() + absent.len());
    let mut absent = absent.into_iter();
    for e in present {
        plan.push((e, true));
        if let Some(a) = absent.next() {
            plan.push((a, false));
        }
    }
    plan
}

/// Loads all edges, then checks a mixed sample of edges and non-edges.
/// `mismatches` counts answers that disagree with the edge set.
pub fn bench_query(edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let g = load(edges, cfg)?;
    let plan = query_plan(edges, cfg);
    let mut answers = Vec::with_capacity(plan.len());
    let start = Instant::now();
    for (e, _) in &plan {
        answers.push(g.contains(e.u, e.v));
    }
    let total = start.elapsed();
    let hits = answers.iter().filter(|&&a| a).count() as u64;
    let mismatches = plan
        .iter()
        .zip(&answers)
        .filter(|((_, want), got)| want != *got)
        .count() as u64;
    Ok(report(
        "query",
        cfg,
        plan.len(),
        total,
        vec![("hits", hits), ("mismatches", mismatches)],
        &g,
    ))
}

/// Builds one static k²-tree from all edges; mean is per input edge.
pub fn bench_static(edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    let n = vertex_count(edges);
    let start = Instant::now();
    let tree = K2Tree::build(n, cfg.k, edges.iter().copied())?;
    let total = start.elapsed();
    Ok(BenchReport {
        operation: "static",
        config: *cfg,
        op_count: edges.len() as u64,
        total,
        counts: vec![("edges", tree.edge_count())],
        stats: None,
        serialized_bytes: tree.serialized_len() as u64,
    })
}

pub fn bench_edges(kind: BenchKind, edges: &[Edge], cfg: &BenchConfig) -> Result<BenchReport> {
    match kind {
        BenchKind::Add => bench_add(edges, cfg),
        BenchKind::Delete => bench_delete(edges, cfg),
        BenchKind::List => bench_list(edges, cfg),
        BenchKind::Query => bench_query(edges, cfg),
        BenchKind::Static => bench_static(edges, cfg),
    }
}

pub fn bench_file(
    kind: BenchKind,
    path: impl AsRef<Path>,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let edges = read_edge_list(path)?;
    bench_edges(kind, &edges, cfg)
}
