//! Static k²-trees over square adjacency matrices.
//!
//! The matrix of side `s = k^h` is split into `k²` submatrices per level, one
//! bit per submatrix (set iff it holds an edge). Children are numbered
//! row-major within their parent. Levels are stored breadth-first: internal
//! levels concatenated in `T`, the cell level in `L`. Level 1 always holds
//! `k²` bits, even for the empty tree; for `h == 1` that level is `L`.
//!
//! Navigation uses rank over `T` only. The children of the 1-bit at position
//! `x` of `T` start at `k² * (rank1(T, x) + 1)` in the virtual concatenation
//! `T ++ L`, so clearing bits of `L` never touches the rank directory.
//!
//! Deletions clear bits in `L` and may leave internal 1-bits whose subtree has
//! no live cell. Every set operation emits canonical output, so
//! [`K2Tree::compact`] (a union with nothing) restores the canonical form.

use std::collections::VecDeque;
use std::io::{Read, Write};

use crate::bitvec::{BitVector, ClearableBitVector, RankBitVector};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"K2TR";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 8 + 4 * 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: u64,
    pub v: u64,
}

impl Edge {
    pub const fn new(u: u64, v: u64) -> Self {
        Self { u, v }
    }
}

impl From<(u64, u64)> for Edge {
    fn from((u, v): (u64, u64)) -> Self {
        Self { u, v }
    }
}

pub(crate) fn check_arity(k: usize) -> Result<()> {
    if (2..=255).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidArity(k))
    }
}

/// Smallest `h >= 1` with `k^h >= max(n, 2)`.
pub fn height_for(n: u64, k: usize) -> Result<usize> {
    check_arity(k)?;
    let target = u128::from(n.max(2));
    let (mut side, mut h) = (1u128, 0usize);
    while side < target {
        side *= k as u128;
        h += 1;
    }
    if side > 1u128 << 64 {
        return Err(Error::BoundTooLarge(n));
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K2Tree {
    k: usize,
    h: usize,
    n: u64,
    t: RankBitVector,
    l: ClearableBitVector,
    m_live: u64,
    // divs[level] = k^(h - 1 - level): digit divisor for children of a node at `level`
    divs: Vec<u64>,
}

fn divisors(k: usize, h: usize) -> Vec<u64> {
    let mut divs = vec![1u64; h];
    for lvl in (0..h.saturating_sub(1)).rev() {
        divs[lvl] = divs[lvl + 1] * k as u64;
    }
    divs
}

impl K2Tree {
    pub fn empty(n: u64, k: usize) -> Result<Self> {
        Self::build(n, k, std::iter::empty())
    }

    /// Builds a tree holding the distinct edges of `edges`.
    ///
    /// Edges are sorted by their z-order key at arity `k` and each level is
    /// emitted in one pass over the sorted run.
    pub fn build<I>(n: u64, k: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let h = height_for(n, k)?;
        let divs = divisors(k, h);
        let kk = k as u64;
        let k2 = k * k;

        let mut keyed = Vec::new();
        for e in edges {
            for x in [e.u, e.v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: x,
                        bound: n,
                    });
                }
            }
            let key = divs.iter().fold(0u128, |key, &d| {
                let digit = ((e.u / d) % kk) * kk + (e.v / d) % kk;
                key * k2 as u128 + u128::from(digit)
            });
            keyed.push((key, e));
        }
        keyed.sort_unstable_by_key(|&(key, _)| key);
        keyed.dedup_by_key(|&mut (key, _)| key);

        let mut levels: Vec<BitVector> = (0..h).map(|_| BitVector::new()).collect();
        if keyed.is_empty() {
            levels[0].push_zeros(k2);
        }
        for (lvl, out) in levels.iter_mut().enumerate() {
            let mut group = None;
            let mut base = 0;
            for &(_, e) in &keyed {
                let g = if lvl == 0 {
                    (0, 0)
                } else {
                    (e.u / divs[lvl - 1], e.v / divs[lvl - 1])
                };
                if group != Some(g) {
                    group = Some(g);
                    base = out.len();
                    out.push_zeros(k2);
                }
                let d = divs[lvl];
                out.set(base + (((e.u / d) % kk) * kk + (e.v / d) % kk) as usize);
            }
        }
        Ok(Self::from_levels(k, h, n, levels))
    }

    fn from_levels(k: usize, h: usize, n: u64, mut levels: Vec<BitVector>) -> Self {
        debug_assert_eq!(levels.len(), h);
        let leaves = levels.pop().unwrap();
        let mut t = BitVector::with_capacity(levels.iter().map(BitVector::len).sum());
        for lvl in &levels {
            t.extend_from(lvl);
        }
        let m_live = leaves.count_ones() as u64;
        Self {
            k,
            h,
            n,
            t: RankBitVector::new(t),
            l: ClearableBitVector::new(leaves),
            m_live,
            divs: divisors(k, h),
        }
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn height(&self) -> usize {
        self.h
    }

    /// Declared vertex bound: all edges lie in `[0, n)²`.
    pub fn vertex_bound(&self) -> u64 {
        self.n
    }

    /// Number of live edges (set bits in `L`).
    pub fn edge_count(&self) -> u64 {
        self.m_live
    }

    pub fn is_empty(&self) -> bool {
        self.m_live == 0
    }

    pub fn internal_bits(&self) -> &BitVector {
        self.t.bits()
    }

    pub fn leaf_bits(&self) -> &BitVector {
        self.l.bits()
    }

    fn check_vertex(&self, x: u64) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: x,
                bound: self.n,
            })
        }
    }

    #[inline]
    fn children_of(&self, x: usize) -> usize {
        self.k * self.k * (self.t.rank1_unchecked(x) + 1)
    }

    /// Index in `L` of cell `(u, v)` if its whole path of internal bits is set.
    fn locate(&self, u: u64, v: u64) -> Option<usize> {
        let kk = self.k as u64;
        let mut pos = 0;
        for (lvl, &d) in self.divs.iter().enumerate() {
            let x = pos + (((u / d) % kk) * kk + (v / d) % kk) as usize;
            if lvl + 1 == self.h {
                return Some(x - self.t.len());
            }
            if !self.t.get(x) {
                return None;
            }
            pos = self.children_of(x);
        }
        unreachable!("height is at least one")
    }

    pub fn contains(&self, u: u64, v: u64) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.locate(u, v).is_some_and(|i| self.l.get(i)))
    }

    /// Tombstones `(u, v)`. Returns whether the edge was live.
    pub fn delete(&mut self, u: u64, v: u64) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let Some(i) = self.locate(u, v) else {
            return Ok(false);
        };
        let was_live = self.l.clear(i)?;
        if was_live {
            self.m_live -= 1;
        }
        Ok(was_live)
    }

    /// Sorted targets of `u`.
    pub fn neighbors(&self, u: u64) -> Result<Vec<u64>> {
        self.check_vertex(u)?;
        let mut out = Vec::new();
        self.scan_line(0, 0, u, 0, true, &mut out);
        Ok(out)
    }

    /// Sorted sources of `v`.
    pub fn reverse_neighbors(&self, v: u64) -> Result<Vec<u64>> {
        self.check_vertex(v)?;
        let mut out = Vec::new();
        self.scan_line(0, 0, v, 0, false, &mut out);
        Ok(out)
    }

    fn scan_line(
        &self,
        lvl: usize,
        pos: usize,
        fixed: u64,
        prefix: u64,
        by_row: bool,
        out: &mut Vec<u64>,
    ) {
        let k = self.k;
        let fd = ((fixed / self.divs[lvl]) % k as u64) as usize;
        for c in 0..k {
            let x = pos + if by_row { fd * k + c } else { c * k + fd };
            let id = prefix * k as u64 + c as u64;
            if lvl + 1 == self.h {
                if self.l.get(x - self.t.len()) {
                    out.push(id);
                }
            } else if self.t.get(x) {
                self.scan_line(lvl + 1, self.children_of(x), fixed, id, by_row, out);
            }
        }
    }

    /// Live edges in row-major order, produced one matrix row at a time.
    pub fn edges(&self) -> Edges<'_> {
        Edges {
            tree: self,
            stack: vec![Band {
                level: 0,
                row_prefix: 0,
                nodes: vec![(0, 0)],
                next_digit: 0,
            }],
            pending: VecDeque::new(),
        }
    }

    pub fn union(&self, other: &K2Tree) -> Result<K2Tree> {
        SetOp::run(self, other, OpKind::Union)
    }

    pub fn intersection(&self, other: &K2Tree) -> Result<K2Tree> {
        SetOp::run(self, other, OpKind::Intersection)
    }

    pub fn difference(&self, other: &K2Tree) -> Result<K2Tree> {
        SetOp::run(self, other, OpKind::Difference)
    }

    /// Canonical copy with tombstoned subtrees pruned.
    pub fn compact(&self) -> K2Tree {
        SetOp::unary(self)
    }

    /// True iff every internal 1-bit has a live cell below it.
    pub fn is_canonical(&self) -> bool {
        fn live_below(t: &K2Tree, lvl: usize, pos: usize, ok: &mut bool) -> bool {
            let k2 = t.k * t.k;
            let mut any = false;
            for x in pos..pos + k2 {
                if lvl + 1 == t.h {
                    any |= t.l.get(x - t.t.len());
                } else if t.t.get(x) {
                    let below = live_below(t, lvl + 1, t.children_of(x), ok);
                    *ok &= below;
                    any |= below;
                }
            }
            any
        }
        let mut ok = true;
        live_below(self, 0, 0, &mut ok);
        ok
    }

    pub fn serialized_len(&self) -> usize {
        HEADER_LEN + self.t.bits().packed_len() + self.l.bits().packed_len()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.k as u8, self.h as u8, 0])?;
        for x in [
            self.n,
            self.m_live,
            self.t.len() as u64,
            self.l.len() as u64,
        ] {
            w.write_all(&x.to_le_bytes())?;
        }
        self.t.bits().write_packed(w)?;
        self.l.bits().write_packed(w)?;
        Ok(())
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head).map_err(Error::from_read)?;
        if &head[..4] != MAGIC {
            return Err(Error::format("bad k2-tree magic"));
        }
        if head[4] != VERSION {
            return Err(Error::format(format!(
                "unsupported k2-tree version {}",
                head[4]
            )));
        }
        let (k, h) = (usize::from(head[5]), usize::from(head[6]));
        check_arity(k).map_err(|_| Error::format(format!("invalid arity {k}")))?;
        if head[7] != 0 {
            return Err(Error::format("reserved header byte is not zero"));
        }
        let mut fields = [0u64; 4];
        for f in &mut fields {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(Error::from_read)?;
            *f = u64::from_le_bytes(buf);
        }
        let [n, m_live, tlen, llen] = fields;
        if height_for(n, k).ok() != Some(h) {
            return Err(Error::format(format!(
                "height {h} inconsistent with n={n}, k={k}"
            )));
        }
        let to_usize =
            |x: u64| usize::try_from(x).map_err(|_| Error::format("bitmap length overflow"));
        let t = BitVector::read_packed(r, to_usize(tlen)?)?;
        let l = BitVector::read_packed(r, to_usize(llen)?)?;

        // level ℓ+1 holds k² bits per set bit of level ℓ
        let k2 = k * k;
        let (mut start, mut len) = (0usize, k2);
        for _ in 0..h - 1 {
            let end = start
                .checked_add(len)
                .filter(|&end| end <= t.len())
                .ok_or_else(|| Error::format("internal bitmap shorter than its levels"))?;
            len = k2 * t.count_ones_in(start, end);
            start = end;
        }
        if start != t.len() || len != l.len() {
            return Err(Error::format(
                "bitmap lengths inconsistent with tree structure",
            ));
        }
        if l.count_ones() as u64 != m_live {
            return Err(Error::format("live edge count does not match leaf bitmap"));
        }
        Ok(Self {
            k,
            h,
            n,
            t: RankBitVector::new(t),
            l: ClearableBitVector::new(l),
            m_live,
            divs: divisors(k, h),
        })
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let tree = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return Err(Error::format("trailing bytes after k2-tree"));
        }
        Ok(tree)
    }
}

/// Row-major edge stream; see [`K2Tree::edges`].
pub struct Edges<'a> {
    tree: &'a K2Tree,
    stack: Vec<Band>,
    pending: VecDeque<Edge>,
}

/// Nodes of one level that intersect a given band of rows, ordered by column.
struct Band {
    level: usize,
    row_prefix: u64,
    // (children start, column prefix)
    nodes: Vec<(usize, u64)>,
    next_digit: usize,
}

impl Iterator for Edges<'_> {
    type Item = Edge;

    fn next(&mut self) -> Option<Edge> {
        let tree = self.tree;
        let k = tree.k;
        loop {
            if let Some(e) = self.pending.pop_front() {
                return Some(e);
            }
            let top = self.stack.last_mut()?;
            if top.next_digit == k {
                self.stack.pop();
                continue;
            }
            let rd = top.next_digit;
            top.next_digit += 1;
            let row = top.row_prefix * k as u64 + rd as u64;
            if top.level + 1 == tree.h {
                for &(pos, cp) in &top.nodes {
                    for cd in 0..k {
                        if tree.l.get(pos + rd * k + cd - tree.t.len()) {
                            self.pending
                                .push_back(Edge::new(row, cp * k as u64 + cd as u64));
                        }
                    }
                }
            } else {
                let mut nodes = Vec::new();
                for &(pos, cp) in &top.nodes {
                    for cd in 0..k {
                        let x = pos + rd * k + cd;
                        if tree.t.get(x) {
                            nodes.push((tree.children_of(x), cp * k as u64 + cd as u64));
                        }
                    }
                }
                if !nodes.is_empty() {
                    let level = top.level + 1;
                    self.stack.push(Band {
                        level,
                        row_prefix: row,
                        nodes,
                        next_digit: 0,
                    });
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OpKind {
    Union,
    Intersection,
    Difference,
}

impl OpKind {
    #[inline]
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            OpKind::Union => a | b,
            OpKind::Intersection => a & b,
            OpKind::Difference => a & !b,
        }
    }

    /// Whether a child with these operands present can yield any edge.
    #[inline]
    fn may_yield(self, a: bool, b: bool) -> bool {
        match self {
            OpKind::Union => a | b,
            OpKind::Intersection => a & b,
            OpKind::Difference => a,
        }
    }
}

/// Position of a traversal inside one operand.
#[derive(Clone, Copy, Debug)]
enum Cursor {
    Absent,
    /// Padding level of a shorter tree: only child 0 exists, `n` levels remain
    /// above the operand's real root.
    Lifted(usize),
    /// Real node whose children start at this offset of `T ++ L`.
    At(usize),
}

impl Cursor {
    fn root(tree: &K2Tree, h: usize) -> Self {
        if h > tree.h {
            Cursor::Lifted(h - tree.h)
        } else {
            Cursor::At(0)
        }
    }

    fn is_present(self) -> bool {
        !matches!(self, Cursor::Absent)
    }

    fn child(self, tree: &K2Tree, c: usize) -> Self {
        match self {
            Cursor::Absent => Cursor::Absent,
            Cursor::Lifted(_) if c != 0 => Cursor::Absent,
            Cursor::Lifted(1) => Cursor::At(0),
            Cursor::Lifted(d) => Cursor::Lifted(d - 1),
            Cursor::At(pos) => {
                let x = pos + c;
                if tree.t.get(x) {
                    Cursor::At(tree.children_of(x))
                } else {
                    Cursor::Absent
                }
            }
        }
    }

    fn leaf(self, tree: &K2Tree, c: usize) -> bool {
        match self {
            Cursor::At(pos) => tree.l.get(pos + c - tree.t.len()),
            _ => false,
        }
    }
}

/// Synchronized depth-first traversal of two trees.
///
/// Each level has its own output vector. A node's `k²` child bits are appended
/// only after its children are resolved, and only if one of them is
/// non-empty. Depth-first order restricted to one level equals breadth-first
/// order, so the concatenated levels form a canonical tree.
struct SetOp<'a> {
    a: &'a K2Tree,
    b: &'a K2Tree,
    kind: OpKind,
    h: usize,
    k2: usize,
    out: Vec<BitVector>,
}

impl<'a> SetOp<'a> {
    fn run(a: &'a K2Tree, b: &'a K2Tree, kind: OpKind) -> Result<K2Tree> {
        if a.k != b.k {
            return Err(Error::ArityMismatch {
                left: a.k,
                right: b.k,
            });
        }
        let (ra, rb) = (Cursor::root(a, a.h.max(b.h)), Cursor::root(b, a.h.max(b.h)));
        Ok(Self::exec(a, b, kind, ra, rb))
    }

    fn unary(a: &'a K2Tree) -> K2Tree {
        Self::exec(a, a, OpKind::Union, Cursor::At(0), Cursor::Absent)
    }

    fn exec(a: &'a K2Tree, b: &'a K2Tree, kind: OpKind, ra: Cursor, rb: Cursor) -> K2Tree {
        let h = a.h.max(b.h);
        let k2 = a.k * a.k;
        let mut op = SetOp {
            a,
            b,
            kind,
            h,
            k2,
            out: (0..h).map(|_| BitVector::new()).collect(),
        };
        if !op.merge(0, ra, rb) {
            op.out[0].push_zeros(k2);
        }
        K2Tree::from_levels(a.k, h, a.n.max(b.n), op.out)
    }

    fn merge(&mut self, lvl: usize, ca: Cursor, cb: Cursor) -> bool {
        let start = self.out[lvl].len();
        self.out[lvl].push_zeros(self.k2);
        let mut any = false;
        if lvl + 1 == self.h {
            for c in 0..self.k2 {
                if self.kind.apply(ca.leaf(self.a, c), cb.leaf(self.b, c)) {
                    self.out[lvl].set(start + c);
                    any = true;
                }
            }
        } else {
            for c in 0..self.k2 {
                let (xa, xb) = (ca.child(self.a, c), cb.child(self.b, c));
                if !self.kind.may_yield(xa.is_present(), xb.is_present()) {
                    continue;
                }
                if self.merge(lvl + 1, xa, xb) {
                    self.out[lvl].set(start + c);
                    any = true;
                }
            }
        }
        if !any {
            self.out[lvl].truncate(start);
        }
        any
    }
}
