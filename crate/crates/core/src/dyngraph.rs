//! Semi-dynamic graph built from a collection of static k²-trees.
//!
//! New edges land in an uncompressed buffer (`E₀`). When the buffer reaches
//! its capacity it is compressed into a k²-tree and merged, together with the
//! lower static slots, into the smallest slot `j` that can hold the combined
//! edges. Slot capacities follow `m / log^(2 - iε) m`, so their sizes grow
//! geometrically and there are `r = ceil(2/ε)` static slots.
//!
//! Deleting an edge held by a slot only clears its leaf bit. Once the number
//! of such tombstones exceeds `m / log log m` the whole collection is merged
//! into a single slot, dropping them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::k2tree::{check_arity, height_for, Edge, K2Tree};

pub const MAGIC: &[u8; 4] = b"SDKC";
pub const VERSION: u8 = 1;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_ARITY: usize = 2;
/// Floor applied to every slot capacity.
pub const MIN_CAPACITY: u64 = 64;
const INITIAL_BOUND: u64 = 2;
const HEADER_LEN: usize = 8 + 8 + 8 + 8 + 8;

/// `ceil(2/ε)`, the number of static slots.
pub fn slot_count(epsilon: f64) -> Result<usize> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    // absorb float noise such as 2/0.1 = 20.000000000000004
    let r = (2.0 / epsilon - 1e-9).ceil();
    if r > 255.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(r.max(1.0) as usize)
}

fn clamped_log2(m: u64) -> f64 {
    (m.max(4) as f64).log2()
}

/// Maximum number of edges for set `i` when the graph holds `m` edges:
/// `max(64, floor(m / log₂(m)^(2 - iε)))`, with `m` clamped to at least 4.
pub fn capacity(epsilon: f64, i: usize, m: u64) -> u64 {
    let mm = m.max(4) as f64;
    let c = (mm / clamped_log2(m).powf(2.0 - i as f64 * epsilon)).floor();
    MIN_CAPACITY.max(c as u64)
}

/// Tombstone count above which the collection is rebuilt: `m / log₂ log₂ m`.
pub fn tombstone_threshold(m: u64) -> f64 {
    m as f64 / clamped_log2(m).log2()
}

/// Uncompressed edge set with forward and reverse adjacency.
#[derive(Clone, Debug, Default)]
pub struct EdgeBuffer {
    forward: HashMap<u64, BTreeSet<u64>>,
    reverse: HashMap<u64, BTreeSet<u64>>,
    members: HashSet<Edge>,
}

impl EdgeBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.members.contains(&e)
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        if !self.members.insert(e) {
            return false;
        }
        self.forward.entry(e.u).or_default().insert(e.v);
        self.reverse.entry(e.v).or_default().insert(e.u);
        true
    }

    pub fn remove(&mut self, e: Edge) -> bool {
        if !self.members.remove(&e) {
            return false;
        }
        for (map, key, val) in [(&mut self.forward, e.u, e.v), (&mut self.reverse, e.v, e.u)] {
            if let Some(set) = map.get_mut(&key) {
                set.remove(&val);
                if set.is_empty() {
                    map.remove(&key);
                }
            }
        }
        true
    }

    pub fn neighbors(&self, u: u64) -> impl Iterator<Item = u64> + '_ {
        self.forward.get(&u).into_iter().flatten().copied()
    }

    pub fn reverse_neighbors(&self, v: u64) -> impl Iterator<Item = u64> + '_ {
        self.reverse.get(&v).into_iter().flatten().copied()
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.members.iter().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn clear(&mut self) {
        self.forward.clear();
        self.reverse.clear();
        self.members.clear();
    }

    fn check_consistency(&self) -> Result<(), String> {
        let fwd: usize = self.forward.values().map(BTreeSet::len).sum();
        let rev: usize = self.reverse.values().map(BTreeSet::len).sum();
        if fwd != self.len() || rev != self.len() {
            return Err(format!(
                "buffer sizes disagree: members={} forward={fwd} reverse={rev}",
                self.len()
            ));
        }
        for e in &self.members {
            let f = self.forward.get(&e.u).is_some_and(|s| s.contains(&e.v));
            let r = self.reverse.get(&e.v).is_some_and(|s| s.contains(&e.u));
            if !(f && r) {
                return Err(format!("buffer edge {e:?} missing from adjacency"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Slot {
    tree: K2Tree,
    tombstones: u64,
}

/// Structural maintenance performed by the collection, recorded when the
/// event log is enabled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaintenanceEvent {
    /// Buffer overflow: the sets listed in `moved_from` (0 = buffer) were
    /// merged into slot `target`, which already held `retained` live edges.
    Flush {
        target: usize,
        moved_from: Vec<(usize, u64)>,
        retained: u64,
    },
    /// Tombstone threshold exceeded: all live edges went to `target`.
    FullRebuild { target: Option<usize>, edges: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub flushes: u64,
    pub full_rebuilds: u64,
    /// Edges moved from a lower set into a higher slot by flushes.
    pub edges_moved: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphStats {
    pub epsilon: f64,
    pub k: usize,
    pub n_bound: u64,
    pub m: u64,
    pub deleted: u64,
    pub buffer_edges: u64,
    /// Live edges per static slot `1..=r`.
    pub slot_edges: Vec<u64>,
    /// Serialized size in bytes of each slot as currently held (0 if absent).
    pub slot_bytes: Vec<u64>,
    /// Size of [`DynamicGraph::save`] output, before tombstone compaction.
    pub serialized_bytes: u64,
    pub counters: Counters,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        writeln!(f, "epsilon={}", self.epsilon)?;
        writeln!(f, "k={}", self.k)?;
        writeln!(f, "n_bound={}", self.n_bound)?;
        writeln!(f, "m={}", self.m)?;
        writeln!(f, "deleted={}", self.deleted)?;
        writeln!(f, "buffer_edges={}", self.buffer_edges)?;
        writeln!(f, "slot_edges={}", join(&self.slot_edges))?;
        writeln!(f, "slot_bytes={}", join(&self.slot_bytes))?;
        writeln!(f, "serialized_bytes={}", self.serialized_bytes)?;
        writeln!(f, "flushes={}", self.counters.flushes)?;
        writeln!(f, "full_rebuilds={}", self.counters.full_rebuilds)?;
        write!(f, "edges_moved={}", self.counters.edges_moved)
    }
}

#[derive(Clone, Debug)]
pub struct DynamicGraph {
    epsilon: f64,
    k: usize,
    buffer: EdgeBuffer,
    // slot j (1-based) lives at slots[j - 1]
    slots: Vec<Option<Slot>>,
    m: u64,
    deleted: u64,
    n_bound: u64,
    counters: Counters,
    events: Option<Vec<MaintenanceEvent>>,
}

impl Default for DynamicGraph {
    fn default() -> Self {
        Self::new(DEFAULT_EPSILON, DEFAULT_ARITY).expect("defaults are valid")
    }
}

impl DynamicGraph {
    pub fn new(epsilon: f64, k: usize) -> Result<Self> {
        check_arity(k)?;
        let r = slot_count(epsilon)?;
        Ok(Self {
            epsilon,
            k,
            buffer: EdgeBuffer::new(),
            slots: vec![None; r],
            m: 0,
            deleted: 0,
            n_bound: INITIAL_BOUND,
            counters: Counters::default(),
            events: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    /// Number of static slots `r`.
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Live edge count `m`.
    pub fn edge_count(&self) -> u64 {
        self.m
    }

    /// Tombstones currently held by static slots.
    pub fn tombstones(&self) -> u64 {
        self.deleted
    }

    pub fn vertex_bound(&self) -> u64 {
        self.n_bound
    }

    pub fn buffer(&self) -> &EdgeBuffer {
        &self.buffer
    }

    /// Static slot `j` in `1..=r`.
    pub fn slot(&self, j: usize) -> Option<&K2Tree> {
        self.slots.get(j.checked_sub(1)?)?.as_ref().map(|s| &s.tree)
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Capacity of set `i` at the current edge count.
    pub fn capacity(&self, i: usize) -> u64 {
        capacity(self.epsilon, i, self.m)
    }

    /// Starts recording [`MaintenanceEvent`]s.
    pub fn enable_event_log(&mut self) {
        self.events.get_or_insert_with(Vec::new);
    }

    pub fn take_events(&mut self) -> Vec<MaintenanceEvent> {
        self.events.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn record(&mut self, ev: MaintenanceEvent) {
        if let Some(log) = &mut self.events {
            log.push(ev);
        }
    }

    fn slot_live(&self, j: usize) -> u64 {
        self.slot(j).map_or(0, K2Tree::edge_count)
    }

    fn ensure_bound(&mut self, id: u64) -> Result<()> {
        let mut bound = self.n_bound;
        while bound <= id {
            if bound == u64::MAX {
                return Err(Error::VertexOutOfRange { vertex: id, bound });
            }
            bound = bound.saturating_mul(2);
        }
        if bound != self.n_bound {
            height_for(bound, self.k)?;
            self.n_bound = bound;
        }
        Ok(())
    }

    /// Inserts `(u, v)`. Returns `false` if the edge is already present.
    ///
    /// Fails only for vertex ids whose matrix side would not fit in 64 bits.
    pub fn add_edge(&mut self, u: u64, v: u64) -> Result<bool> {
        self.ensure_bound(u.max(v))?;
        if self.contains(u, v) {
            return Ok(false);
        }
        if self.buffer.len() as u64 >= self.capacity(0) {
            self.flush()?;
        }
        self.buffer.insert(Edge::new(u, v));
        self.m += 1;
        Ok(true)
    }

    /// Compresses the buffer and merges it with slots `1..j` into slot `j`,
    /// the smallest one whose capacity covers the combined live edges.
    fn flush(&mut self) -> Result<()> {
        let r = self.slot_count();
        let mut total = self.buffer.len() as u64;
        let mut target = r;
        for j in 1..=r {
            total += self.slot_live(j);
            if total <= self.capacity(j) {
                target = j;
                break;
            }
        }

        let mut moved_from = vec![(0, self.buffer.len() as u64)];
        let mut acc = K2Tree::build(self.n_bound, self.k, self.buffer.edges())?;
        self.buffer.clear();
        for j in 1..target {
            if let Some(slot) = self.slots[j - 1].take() {
                acc = acc.union(&slot.tree)?;
                self.deleted -= slot.tombstones;
                moved_from.push((j, slot.tree.edge_count()));
            }
        }
        let mut retained = 0;
        if let Some(slot) = self.slots[target - 1].take() {
            acc = acc.union(&slot.tree)?;
            self.deleted -= slot.tombstones;
            retained = slot.tree.edge_count();
        }
        self.slots[target - 1] = Some(Slot {
            tree: acc,
            tombstones: 0,
        });

        self.counters.flushes += 1;
        self.counters.edges_moved += moved_from.iter().map(|&(_, c)| c).sum::<u64>();
        self.record(MaintenanceEvent::Flush {
            target,
            moved_from,
            retained,
        });
        Ok(())
    }

    /// Merges every set into the smallest slot that can hold all `m` edges.
    fn full_rebuild(&mut self) -> Result<()> {
        let mut acc = K2Tree::build(self.n_bound, self.k, self.buffer.edges())?;
        self.buffer.clear();
        for slot in self.slots.iter_mut().filter_map(Option::take) {
            acc = acc.union(&slot.tree)?;
        }
        debug_assert_eq!(acc.edge_count(), self.m);
        self.deleted = 0;
        let target = (self.m > 0).then(|| {
            (1..=self.slot_count())
                .find(|&j| self.m <= self.capacity(j))
                .unwrap_or(self.slot_count())
        });
        if let Some(j) = target {
            self.slots[j - 1] = Some(Slot {
                tree: acc,
                tombstones: 0,
            });
        }
        self.counters.full_rebuilds += 1;
        self.record(MaintenanceEvent::FullRebuild {
            target,
            edges: self.m,
        });
        Ok(())
    }

    /// Removes `(u, v)`. Returns whether it was present.
    pub fn remove_edge(&mut self, u: u64, v: u64) -> bool {
        let e = Edge::new(u, v);
        let removed = if self.buffer.remove(e) {
            true
        } else {
            self.slots.iter_mut().flatten().any(|slot| {
                let n = slot.tree.vertex_bound();
                if u < n && v < n && slot.tree.delete(u, v).unwrap_or(false) {
                    slot.tombstones += 1;
                    self.deleted += 1;
                    true
                } else {
                    false
                }
            })
        };
        if !removed {
            return false;
        }
        self.m -= 1;
        // rebuilding from existing trees cannot fail: arity and bounds are already valid
        if self.deleted as f64 > tombstone_threshold(self.m) {
            self.full_rebuild().expect("rebuild of valid trees");
        }
        if self.buffer.len() as u64 > self.capacity(0) {
            self.flush().expect("flush of valid buffer");
        }
        true
    }

    pub fn contains(&self, u: u64, v: u64) -> bool {
        if u >= self.n_bound || v >= self.n_bound {
            return false;
        }
        self.buffer.contains(Edge::new(u, v))
            || self.slots.iter().flatten().any(|s| {
                let n = s.tree.vertex_bound();
                u < n && v < n && s.tree.contains(u, v).unwrap_or(false)
            })
    }

    pub fn neighbors(&self, u: u64) -> Vec<u64> {
        self.line(u, true)
    }

    pub fn reverse_neighbors(&self, v: u64) -> Vec<u64> {
        self.line(v, false)
    }

    fn line(&self, x: u64, forward: bool) -> Vec<u64> {
        let mut out: Vec<u64> = if forward {
            self.buffer.neighbors(x).collect()
        } else {
            self.buffer.reverse_neighbors(x).collect()
        };
        for s in self.slots.iter().flatten() {
            if x < s.tree.vertex_bound() {
                let part = if forward {
                    s.tree.neighbors(x)
                } else {
                    s.tree.reverse_neighbors(x)
                };
                out.extend(part.unwrap_or_default());
            }
        }
        out.sort_unstable();
        out
    }

    /// All live edges in row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = self.buffer.edges();
        for s in self.slots.iter().flatten() {
            out.extend(s.tree.edges());
        }
        out.sort_unstable();
        out
    }

    pub fn stats(&self) -> GraphStats {
        let slot_edges = (1..=self.slot_count()).map(|j| self.slot_live(j)).collect();
        let slot_bytes: Vec<u64> = self
            .slots
            .iter()
            .map(|s| s.as_ref().map_or(0, |s| s.tree.serialized_len() as u64))
            .collect();
        let serialized_bytes = HEADER_LEN as u64
            + 16 * self.buffer.len() as u64
            + self.slot_count() as u64
            + slot_bytes.iter().sum::<u64>();
        GraphStats {
            epsilon: self.epsilon,
            k: self.k,
            n_bound: self.n_bound,
            m: self.m,
            deleted: self.deleted,
            buffer_edges: self.buffer.len() as u64,
            slot_edges,
            slot_bytes,
            serialized_bytes,
            counters: self.counters,
        }
    }

    /// Checks the accounting invariants that are cheap to verify.
    pub fn check_invariants(&self) -> Result<(), String> {
        let in_slots: u64 = (1..=self.slot_count()).map(|j| self.slot_live(j)).sum();
        if self.m != self.buffer.len() as u64 + in_slots {
            return Err(format!(
                "m={} but buffer={} + slots={in_slots}",
                self.m,
                self.buffer.len()
            ));
        }
        if self.buffer.len() as u64 > self.capacity(0) {
            return Err(format!(
                "buffer holds {} edges, capacity {}",
                self.buffer.len(),
                self.capacity(0)
            ));
        }
        let tomb: u64 = self.slots.iter().flatten().map(|s| s.tombstones).sum();
        if tomb != self.deleted {
            return Err(format!("deleted={} but slots hold {tomb}", self.deleted));
        }
        if self.deleted as f64 > tombstone_threshold(self.m).max(1.0) {
            return Err(format!(
                "deleted={} exceeds threshold {}",
                self.deleted,
                tombstone_threshold(self.m)
            ));
        }
        for s in self.slots.iter().flatten() {
            if s.tree.arity() != self.k || s.tree.vertex_bound() > self.n_bound {
                return Err("slot tree incompatible with collection".into());
            }
        }
        if let Some(e) = self
            .buffer
            .members
            .iter()
            .find(|e| e.u.max(e.v) >= self.n_bound)
        {
            return Err(format!("buffer edge {e:?} beyond n_bound={}", self.n_bound));
        }
        self.buffer.check_consistency()
    }

    /// Verifies that no live edge is stored in two sets. Linear in `m`.
    pub fn check_disjoint(&self) -> Result<(), String> {
        let mut seen: HashSet<Edge> = self.buffer.members.clone();
        for (j, s) in self.slots.iter().enumerate() {
            for e in s.iter().flat_map(|s| s.tree.edges()) {
                if !seen.insert(e) {
                    return Err(format!("edge {e:?} duplicated in slot {}", j + 1));
                }
            }
        }
        Ok(())
    }

    /// Writes the collection file. Tombstoned edges are compacted away.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.k as u8, self.slot_count() as u8, 0])?;
        w.write_all(&self.epsilon.to_le_bytes())?;
        for x in [self.n_bound, self.m, self.buffer.len() as u64] {
            w.write_all(&x.to_le_bytes())?;
        }
        for e in self.buffer.edges() {
            w.write_all(&e.u.to_le_bytes())?;
            w.write_all(&e.v.to_le_bytes())?;
        }
        for slot in &self.slots {
            let compacted;
            let tree = match slot {
                Some(s) if s.tombstones > 0 => {
                    compacted = s.tree.compact();
                    &compacted
                }
                Some(s) => &s.tree,
                None => {
                    w.write_all(&[0])?;
                    continue;
                }
            };
            if tree.is_empty() {
                w.write_all(&[0])?;
            } else {
                w.write_all(&[1])?;
                tree.write_to(w)?;
            }
        }
        Ok(())
    }

    pub fn save(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.stats().serialized_bytes as usize);
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        fn u64_le<R: Read>(r: &mut R) -> Result<u64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(Error::from_read)?;
            Ok(u64::from_le_bytes(buf))
        }

        let mut head = [0u8; 8];
        r.read_exact(&mut head).map_err(Error::from_read)?;
        if &head[..4] != MAGIC {
            return Err(Error::format("bad collection magic"));
        }
        if head[4] != VERSION {
            return Err(Error::format(format!(
                "unsupported collection version {}",
                head[4]
            )));
        }
        if head[7] != 0 {
            return Err(Error::format("reserved header byte is not zero"));
        }
        let epsilon = f64::from_bits(u64_le(r)?);
        let k = usize::from(head[5]);
        let mut g = Self::new(epsilon, k).map_err(|e| Error::format(e.to_string()))?;
        if g.slot_count() != usize::from(head[6]) {
            return Err(Error::format(format!(
                "slot count {} does not match epsilon {epsilon}",
                head[6]
            )));
        }
        g.n_bound = u64_le(r)?;
        height_for(g.n_bound, k).map_err(|e| Error::format(e.to_string()))?;
        let m = u64_le(r)?;
        let buffered = u64_le(r)?;
        for _ in 0..buffered {
            let e = Edge::new(u64_le(r)?, u64_le(r)?);
            if e.u.max(e.v) >= g.n_bound {
                return Err(Error::format(format!("buffer edge {e:?} beyond n_bound")));
            }
            if !g.buffer.insert(e) {
                return Err(Error::format(format!("duplicate buffer edge {e:?}")));
            }
        }
        for j in 0..g.slot_count() {
            let mut flag = [0u8; 1];
            r.read_exact(&mut flag).map_err(Error::from_read)?;
            match flag[0] {
                0 => {}
                1 => {
                    let tree = K2Tree::read_from(r)?;
                    if tree.arity() != k || tree.vertex_bound() > g.n_bound {
                        return Err(Error::format(format!("slot {} incompatible", j + 1)));
                    }
                    g.slots[j] = Some(Slot {
                        tree,
                        tombstones: 0,
                    });
                }
                b => return Err(Error::format(format!("bad slot presence byte {b}"))),
            }
        }
        g.m = g.buffer.len() as u64 + (1..=g.slot_count()).map(|j| g.slot_live(j)).sum::<u64>();
        if g.m != m {
            return Err(Error::format(format!("header m={m} but sets hold {}", g.m)));
        }
        if g.buffer.len() as u64 > g.capacity(0) {
            g.flush()?;
        }
        Ok(g)
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let g = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return Err(Error::format("trailing bytes after collection"));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_schedule_values() {
        // log₂ 65536 = 16
        assert_eq!(capacity(0.25, 0, 65536), 65536 / 256);
        assert_eq!(capacity(0.25, 8, 65536), 65536);
        assert_eq!(capacity(0.25, 4, 65536), 65536 / 16);
        assert_eq!(capacity(0.25, 0, 0), MIN_CAPACITY);
        assert_eq!(capacity(0.25, 8, 10), MIN_CAPACITY);
        assert_eq!(slot_count(0.25).unwrap(), 8);
        assert_eq!(slot_count(0.1).unwrap(), 20);
        assert_eq!(slot_count(0.3).unwrap(), 7);
        assert_eq!(slot_count(2.0).unwrap(), 1);
        assert!(slot_count(0.0).is_err());
        assert!(slot_count(2.5).is_err());
        assert!(slot_count(f64::NAN).is_err());
        assert!(slot_count(0.001).is_err());
    }

    #[test]
    fn tombstone_threshold_values() {
        // log₂ log₂ 65536 = 4
        assert_eq!(tombstone_threshold(65536), 16384.0);
        assert_eq!(tombstone_threshold(0), 0.0);
        assert_eq!(tombstone_threshold(16), 8.0);
    }

    #[test]
    fn buffer_basics() {
        let mut g = DynamicGraph::default();
        assert!(g.add_edge(0, 1).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.buffer().len(), 1);
        assert!(!g.add_edge(0, 1).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert!(g.contains(0, 1));
        assert_eq!(g.neighbors(0), vec![1]);
        assert_eq!(g.reverse_neighbors(1), vec![0]);
        assert_eq!(g.neighbors(7), Vec::<u64>::new());
        assert!(g.remove_edge(0, 1));
        assert_eq!(g.edge_count(), 0);
        assert!(!g.remove_edge(0, 1));
        assert_eq!(g.tombstones(), 0);
        g.check_invariants().unwrap();
    }

    #[test]
    fn sixty_fifth_edge_flushes() {
        let mut g = DynamicGraph::default();
        g.enable_event_log();
        for i in 0..64 {
            g.add_edge(i, i + 1).unwrap();
        }
        assert_eq!(g.buffer().len(), 64);
        assert!(g.take_events().is_empty());
        g.add_edge(100, 3).unwrap();
        assert_eq!(g.buffer().len(), 1);
        assert!(g.buffer().contains(Edge::new(100, 3)));
        assert_eq!(g.slot(1).map(K2Tree::edge_count), Some(64));
        assert_eq!(
            g.take_events(),
            vec![MaintenanceEvent::Flush {
                target: 1,
                moved_from: vec![(0, 64)],
                retained: 0
            }]
        );
        assert!(g.contains(5, 6));
        assert!(g.remove_edge(5, 6));
        assert!(!g.contains(5, 6));
        assert_eq!(g.tombstones(), 1);
        g.check_invariants().unwrap();
        g.check_disjoint().unwrap();
    }

    #[test]
    fn bound_grows_by_doubling() {
        let mut g = DynamicGraph::default();
        assert_eq!(g.vertex_bound(), 2);
        g.add_edge(0, 5).unwrap();
        assert_eq!(g.vertex_bound(), 8);
        g.add_edge(1000, 0).unwrap();
        assert_eq!(g.vertex_bound(), 1024);
        assert!(g.add_edge(u64::MAX, 0).is_err());
        assert!(!g.contains(u64::MAX, 0));
        g.add_edge(u64::MAX - 1, 0).unwrap();
        assert_eq!(g.vertex_bound(), u64::MAX);
        assert!(g.contains(u64::MAX - 1, 0));

        let mut g3 = DynamicGraph::new(0.25, 3).unwrap();
        assert!(g3.add_edge(u64::MAX - 1, 0).is_err());
        assert_eq!(g3.vertex_bound(), 2);
    }

    #[test]
    fn full_rebuild_clears_tombstones() {
        let mut g = DynamicGraph::default();
        g.enable_event_log();
        for i in 0..200 {
            g.add_edge(i, (i * 7) % 200).unwrap();
        }
        let mut removed = 0;
        for i in 0..200 {
            let before = g.counters().full_rebuilds;
            if g.remove_edge(i, (i * 7) % 200) {
                removed += 1;
            }
            g.check_invariants().unwrap();
            if g.counters().full_rebuilds > before {
                assert_eq!(g.tombstones(), 0);
                break;
            }
        }
        assert!(g.counters().full_rebuilds >= 1, "removed {removed}");
        assert!(g
            .take_events()
            .iter()
            .any(|e| matches!(e, MaintenanceEvent::FullRebuild { .. })));
        g.check_disjoint().unwrap();
        assert_eq!(g.edges().len() as u64, g.edge_count());
    }

    #[test]
    fn stats_render_as_key_values() {
        let mut g = DynamicGraph::default();
        let s = g.stats();
        assert_eq!(s.m, 0);
        assert_eq!(s.deleted, 0);
        assert!(s.slot_edges.iter().all(|&x| x == 0));
        assert_eq!(s.serialized_bytes as usize, g.save().len());
        g.add_edge(0, 1).unwrap();
        let s = g.stats();
        assert_eq!(s.m, 1);
        assert_eq!(s.serialized_bytes as usize, g.save().len());
        let text = s.to_string();
        assert!(text.lines().all(|l| l.split_once('=').is_some()));
        assert!(text.contains("slot_edges=0,0,0,0,0,0,0,0"));
    }

    #[test]
    fn save_load_layout() {
        let mut g = DynamicGraph::default();
        g.add_edge(1, 0).unwrap();
        let bytes = g.save();
        assert_eq!(&bytes[..8], b"SDKC\x01\x02\x08\x00");
        assert_eq!(&bytes[8..16], &0.25f64.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 16 + 8);
        let back = DynamicGraph::load(&bytes).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.vertex_bound(), 2);

        assert!(DynamicGraph::load(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[6] = 7;
        assert!(DynamicGraph::load(&bad).is_err());
        let mut bad = bytes.clone();
        bad[24] = 9; // m
        assert!(DynamicGraph::load(&bad).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(matches!(DynamicGraph::load(&bad), Err(Error::Format(_))));
    }
}
