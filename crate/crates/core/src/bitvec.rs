//! Packed bit sequences.
//!
//! [`BitVector`] is the growable builder type, [`RankBitVector`] adds a
//! constant-time `rank1` directory on top of an immutable sequence, and
//! [`ClearableBitVector`] only allows `1 -> 0` transitions after construction.
//!
//! Bits are packed LSB-first within each byte, bytes in ascending position
//! order. Internally the storage is `u64` words, which gives the same layout
//! once the words are written out little-endian.

use std::io::{Read, Write};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;
const SUPERBLOCK_WORDS: usize = 8; // 512 bits

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    /// A vector of `len` zero bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut bv = Self::new();
        for b in bits {
            bv.push(b);
        }
        bv
    }

    /// Parses a string of `0`/`1` characters; other characters are skipped so
    /// that grouped literals like `"0100 0110"` work.
    pub fn from_bit_str(s: &str) -> Self {
        Self::from_bits(s.chars().filter_map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        }))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = self.len % WORD_BITS;
        if off == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << off;
        }
        self.len += 1;
    }

    /// Appends `count` zero bits.
    pub fn push_zeros(&mut self, count: usize) {
        self.len += count;
        self.words.resize(self.len.div_ceil(WORD_BITS), 0);
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.get(i))
    }

    /// Unchecked in release builds; callers guarantee `i < len`.
    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub(crate) fn unset(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    /// Shortens the vector, zeroing the dropped tail so padding stays canonical.
    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.words.truncate(len.div_ceil(WORD_BITS));
        let off = len % WORD_BITS;
        if off != 0 {
            *self.words.last_mut().unwrap() &= (1 << off) - 1;
        }
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        let off = self.len % WORD_BITS;
        if off == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().unwrap() |= w << off;
                self.words.push(w >> (WORD_BITS - off));
            }
        }
        self.len += other.len;
        self.words.truncate(self.len.div_ceil(WORD_BITS));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Popcount of the half-open range `[start, end)`.
    pub fn count_ones_in(&self, start: usize, end: usize) -> usize {
        debug_assert!(start <= end && end <= self.len);
        if start == end {
            return 0;
        }
        let (ws, we) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        let lo_mask = !0u64 << (start % WORD_BITS);
        let hi_mask = !0u64 >> (WORD_BITS - 1 - (end - 1) % WORD_BITS);
        if ws == we {
            return (self.words[ws] & lo_mask & hi_mask).count_ones() as usize;
        }
        let mut total = (self.words[ws] & lo_mask).count_ones() as usize;
        total += self.words[ws + 1..we]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        total + (self.words[we] & hi_mask).count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of bytes in the packed form.
    pub fn packed_len(&self) -> usize {
        self.len.div_ceil(8)
    }

    /// Writes the `ceil(len/8)` packed bytes, without a length prefix.
    pub fn write_packed<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut remaining = self.packed_len();
        for word in &self.words {
            let bytes = word.to_le_bytes();
            let take = remaining.min(8);
            w.write_all(&bytes[..take])?;
            remaining -= take;
        }
        Ok(())
    }

    /// Reads `ceil(len/8)` packed bytes. Non-zero padding bits are rejected.
    pub fn read_packed<R: Read>(r: &mut R, len: usize) -> Result<Self> {
        let nbytes = len.div_ceil(8);
        let mut bytes = vec![0u8; nbytes];
        r.read_exact(&mut bytes).map_err(Error::from_read)?;
        let mut words = Vec::with_capacity(len.div_ceil(WORD_BITS));
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words.push(u64::from_le_bytes(buf));
        }
        let off = len % WORD_BITS;
        if off != 0 && words.last().is_some_and(|w| w >> off != 0) {
            return Err(Error::format("non-zero padding bits"));
        }
        Ok(Self { words, len })
    }

    /// Length as a little-endian `u64`, then the packed bytes.
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.packed_len());
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        self.write_packed(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut len = [0u8; 8];
        r.read_exact(&mut len).map_err(Error::from_read)?;
        let len = usize::try_from(u64::from_le_bytes(len))
            .map_err(|_| Error::format("bit length does not fit in memory"))?;
        if len.div_ceil(8) > r.len() {
            return Err(Error::format("truncated input"));
        }
        let bv = Self::read_packed(&mut r, len)?;
        if !r.is_empty() {
            return Err(Error::format("trailing bytes after bit vector"));
        }
        Ok(bv)
    }
}

/// Immutable bit vector with a two-level rank directory: cumulative counts
/// every 512 bits, plus 16-bit counts relative to the superblock for every
/// 64-bit word.
#[derive(Clone, Debug, Default)]
pub struct RankBitVector {
    bits: BitVector,
    superblocks: Vec<u64>,
    blocks: Vec<u16>,
    ones: usize,
}

impl RankBitVector {
    pub fn new(bits: BitVector) -> Self {
        let nwords = bits.words.len();
        let mut superblocks = Vec::with_capacity(nwords.div_ceil(SUPERBLOCK_WORDS));
        let mut blocks = Vec::with_capacity(nwords);
        let mut total = 0u64;
        let mut in_super = 0u16;
        for (i, w) in bits.words.iter().enumerate() {
            if i % SUPERBLOCK_WORDS == 0 {
                superblocks.push(total);
                in_super = 0;
            }
            blocks.push(in_super);
            let c = w.count_ones();
            in_super += c as u16;
            total += u64::from(c);
        }
        Self {
            bits,
            superblocks,
            blocks,
            ones: total as usize,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        self.bits.access(i)
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    /// Number of set bits in `[0, i)`. `i == len` is allowed.
    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i > self.bits.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.bits.len,
            });
        }
        Ok(self.rank1_unchecked(i))
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, i: usize) -> usize {
        debug_assert!(i <= self.bits.len);
        if i == self.bits.len {
            return self.ones;
        }
        let w = i / WORD_BITS;
        let base = self.superblocks[w / SUPERBLOCK_WORDS] as usize + self.blocks[w] as usize;
        let mask = (1u64 << (i % WORD_BITS)) - 1;
        base + (self.bits.words[w] & mask).count_ones() as usize
    }
}

impl PartialEq for RankBitVector {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl Eq for RankBitVector {}

/// Bit vector that only permits clearing after construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClearableBitVector {
    bits: BitVector,
}

impl ClearableBitVector {
    pub fn new(bits: BitVector) -> Self {
        Self { bits }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        self.bits.access(i)
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    /// Sets bit `i` to zero and returns its previous value.
    pub fn clear(&mut self, i: usize) -> Result<bool> {
        let prev = self.bits.access(i)?;
        if prev {
            self.bits.unset(i);
        }
        Ok(prev)
    }
}
