//! Partial duplication model generator and plain edge-list files.
//!
//! Growth starts from two vertices joined by a 2-cycle. Each step picks an
//! existing vertex `u` uniformly at random, adds a new vertex `v` and, for
//! every out-edge `(u, w)` and then every in-edge `(w, u)` in insertion order,
//! copies it to `v` with probability `p`.
//!
//! Random draws use ChaCha8 seeded with `seed_from_u64(seed)`:
//! the source vertex is `(next_u64() * count) >> 64` and an edge is kept when
//! `(next_u64() >> 11) * 2^-53 < p`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::k2tree::Edge;

pub const PRNG_NAME: &str = "ChaCha8Rng/seed_from_u64";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub target_vertices: u64,
    pub p: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(target_vertices: u64, p: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            target_vertices,
            p,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_vertices < 2 {
            return Err(Error::InvalidConfig(format!(
                "target_vertices must be at least 2, got {}",
                self.target_vertices
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!(
                "selection probability must be in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }

    /// Contents of the `.meta` side file.
    pub fn meta(&self, edges: usize) -> String {
        format!(
            "model=partial_duplication\ndirected=true\ntarget_vertices={}\np={}\nseed={}\nprng={}\nedges={}\n",
            self.target_vertices, self.p, self.seed, PRNG_NAME, edges
        )
    }
}

/// One growth step: `vertex` was created by duplicating `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub source: u64,
    pub vertex: u64,
    pub added: Vec<Edge>,
}

/// Incremental generator; [`generate`] drives it to completion.
pub struct DuplicationModel {
    p: f64,
    rng: ChaCha8Rng,
    out_adj: Vec<Vec<u64>>,
    in_adj: Vec<Vec<u64>>,
    edges: Vec<Edge>,
}

impl DuplicationModel {
    pub fn new(p: f64, seed: u64) -> Self {
        Self {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            out_adj: vec![vec![1], vec![0]],
            in_adj: vec![vec![1], vec![0]],
            edges: vec![Edge::new(0, 1), Edge::new(1, 0)],
        }
    }

    pub fn vertex_count(&self) -> u64 {
        self.out_adj.len() as u64
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    fn keep(&mut self) -> bool {
        ((self.rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < self.p
    }

    pub fn step(&mut self) -> Step {
        let count = self.vertex_count();
        let source = ((u128::from(self.rng.next_u64()) * u128::from(count)) >> 64) as u64;
        let vertex = count;
        let mut added = Vec::new();
        let mut new_out = Vec::new();
        let mut new_in = Vec::new();

        for i in 0..self.out_adj[source as usize].len() {
            let w = self.out_adj[source as usize][i];
            if self.keep() {
                new_out.push(w);
                added.push(Edge::new(vertex, w));
            }
        }
        for i in 0..self.in_adj[source as usize].len() {
            let w = self.in_adj[source as usize][i];
            if self.keep() {
                new_in.push(w);
                added.push(Edge::new(w, vertex));
            }
        }
        for &w in &new_out {
            self.in_adj[w as usize].push(vertex);
        }
        for &w in &new_in {
            self.out_adj[w as usize].push(vertex);
        }
        self.out_adj.push(new_out);
        self.in_adj.push(new_in);
        self.edges.extend_from_slice(&added);
        Step {
            source,
            vertex,
            added,
        }
    }
}

/// Generates a directed partial-duplication graph. Deterministic per config.
pub fn generate(cfg: &GeneratorConfig) -> Result<Vec<Edge>> {
    cfg.validate()?;
    let mut model = DuplicationModel::new(cfg.p, cfg.seed);
    while model.vertex_count() < cfg.target_vertices {
        model.step();
    }
    Ok(model.into_edges())
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(format!("missing {what} vertex")))?;
            tok.parse()
                .map_err(|_| parse_err(format!("invalid {what} vertex {tok:?}")))
        };
        let (u, v) = (next("source")?, next("target")?);
        if let Some(extra) = fields.next() {
            return Err(parse_err(format!("unexpected token {extra:?}")));
        }
        edges.push(Edge::new(u, v));
    }
    Ok(edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<Edge>> {
    parse_edge_list(BufReader::new(File::open(path)?))
}

pub fn write_edges<W: Write>(w: &mut W, edges: &[Edge]) -> Result<()> {
    for e in edges {
        writeln!(w, "{} {}", e.u, e.v)?;
    }
    Ok(())
}

pub fn write_edge_list(edges: &[Edge], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_edges(&mut w, edges)?;
    w.flush()?;
    Ok(())
}

/// `graph.txt` -> `graph.txt.meta`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Generates a graph and writes it with its `.meta` side file.
pub fn generate_to_file(cfg: &GeneratorConfig, path: impl AsRef<Path>) -> Result<Vec<Edge>> {
    let path = path.as_ref();
    let edges = generate(cfg)?;
    write_edge_list(&edges, path)?;
    std::fs::write(meta_path(path), cfg.meta(edges.len()))?;
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn seed_graph_only() {
        for p in [0.0, 0.5, 1.0] {
            let cfg = GeneratorConfig::new(2, p, 9).unwrap();
            assert_eq!(
                generate(&cfg).unwrap(),
                vec![Edge::new(0, 1), Edge::new(1, 0)]
            );
        }
    }

    #[test]
    fn zero_probability_adds_isolated_vertices() {
        let cfg = GeneratorConfig::new(500, 0.0, 1).unwrap();
        assert_eq!(generate(&cfg).unwrap().len(), 2);
    }

    #[test]
    fn full_probability_copies_whole_neighbourhood() {
        let mut model = DuplicationModel::new(1.0, 3);
        for _ in 0..300 {
            let before: Vec<Edge> = model.edges().to_vec();
            let step = model.step();
            // recount degrees of the source from the raw edge list
            let deg_out = before.iter().filter(|e| e.u == step.source).count();
            let deg_in = before.iter().filter(|e| e.v == step.source).count();
            assert_eq!(model.edges().len(), before.len() + deg_out + deg_in);
            assert_eq!(step.added.len(), deg_out + deg_in);
        }
    }

    #[test]
    fn deterministic_and_in_range() {
        let cfg = GeneratorConfig::new(3000, 0.5, 42).unwrap();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| e.u < 3000 && e.v < 3000 && e.u != e.v));
        let distinct: HashSet<_> = a.iter().collect();
        assert_eq!(distinct.len(), a.len());
        let other = generate(&GeneratorConfig::new(3000, 0.5, 43).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn config_validation() {
        assert!(GeneratorConfig::new(1, 0.5, 0).is_err());
        assert!(GeneratorConfig::new(10, 1.5, 0).is_err());
        assert!(GeneratorConfig::new(10, -0.1, 0).is_err());
        assert!(GeneratorConfig::new(10, f64::NAN, 0).is_err());
    }

    #[test]
    fn parse_edge_lists() {
        assert_eq!(
            parse_edge_list("0 1\n2 3\n".as_bytes()).unwrap(),
            vec![Edge::new(0, 1), Edge::new(2, 3)]
        );
        assert!(parse_edge_list("# only a comment\n".as_bytes())
            .unwrap()
            .is_empty());
        assert_eq!(
            parse_edge_list("# c\n\n 4\t5 \n".as_bytes()).unwrap(),
            vec![Edge::new(4, 5)]
        );
        match parse_edge_list("0 x\n".as_bytes()) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("0 1\n5\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_edge_list("0 1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let cfg = GeneratorConfig::new(200, 0.5, 5).unwrap();
        let edges = generate_to_file(&cfg, &path).unwrap();
        assert_eq!(read_edge_list(&path).unwrap(), edges);
        let meta = std::fs::read_to_string(meta_path(&path)).unwrap();
        assert!(meta.contains("seed=5"));
        assert!(meta.contains(PRNG_NAME));
        assert!(read_edge_list(dir.path().join("missing.txt")).is_err());
    }
}
