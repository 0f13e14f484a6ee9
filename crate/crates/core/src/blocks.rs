//! Block layout shared by both embeddings: the h-vectors and their nested
//! supports, the reflection about a block center, and the Rademacher signs
//! indexed by branch labels.
//!
//! An h-vector of order `m` occupies `[1, 2^(m+1)]`: it is `+1` on a
//! subinterval of the positive half `[1, 2^m]` and `-1` on the mirror image
//! of that subinterval. Sign tuples select nested halves of the positive
//! half: `+` keeps the upper half, `-` the lower half, so a tuple of length
//! `a` selects an interval of `2^(m-a)` coordinates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ratio::rat_int;
use crate::signvec::{RunBuilder, SignVector};

/// Closed 1-based coordinate interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        assert!(1 <= lo && lo <= hi);
        Interval { lo, hi }
    }

    pub fn card(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn shifted(&self, offset: u64) -> Interval {
        Interval::new(self.lo + offset, self.hi + offset)
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// A `+1`/`-1` tuple selecting nested halves of an h-support.
pub type SignTuple = Vec<i8>;

/// The support of the positive part of `h^(order)_eps`.
///
/// The empty tuple gives the whole positive half `[1, 2^order]`; appending
/// `+` keeps the upper half of the current interval, `-` the lower half.
pub fn h_interval(order: u32, eps: &[i8]) -> Result<Interval> {
    let a = eps.len() as u32;
    if a > order {
        return Err(Error::domain(format!(
            "sign tuple of length {a} exceeds order {order}"
        )));
    }
    debug_assert!(eps.iter().all(|&e| e == 1 || e == -1));
    let mut lo = 1u64;
    for (i, &e) in eps.iter().enumerate() {
        if e == 1 {
            lo += 1u64 << (order as usize - i - 1);
        }
    }
    let len = 1u64 << (order - a);
    Ok(Interval::new(lo, lo + len - 1))
}

/// Reflection about the center of `[1, 2^(order+1)]`.
pub fn reflect(order: u32, iv: Interval) -> Interval {
    let top = 1u64 << (order + 1);
    debug_assert!(iv.hi <= top);
    Interval::new(top - iv.hi + 1, top - iv.lo + 1)
}

/// The vector `h^(order)_eps`: `+1` on its positive support, `-1` on the
/// reflected support.
pub fn h_vector(order: u32, eps: &[i8]) -> Result<SignVector> {
    let pos = h_interval(order, eps)?;
    let neg = reflect(order, pos);
    let mut b = RunBuilder::new();
    b.push(pos.lo, pos.card(), rat_int(1));
    b.push(neg.lo, neg.card(), rat_int(-1));
    Ok(b.finish())
}

/// Recovers the sign tuple whose h-support equals `iv`, if any.
pub fn tuple_of_interval(order: u32, iv: Interval) -> Option<SignTuple> {
    let mut eps = SignTuple::new();
    loop {
        let cur = h_interval(order, &eps).ok()?;
        if cur == iv {
            return Some(eps);
        }
        if eps.len() as u32 == order {
            return None;
        }
        let upper = h_interval(order, &[&eps[..], &[1][..]].concat()).ok()?;
        if upper.contains(&iv) {
            eps.push(1);
        } else {
            let lower = h_interval(order, &[&eps[..], &[-1][..]].concat()).ok()?;
            if lower.contains(&iv) {
                eps.push(-1);
            } else {
                return None;
            }
        }
    }
}

/// The canonical enumeration of branch labels and their Rademacher signs.
///
/// Labels are all tuples over `{1..k}` of lengths `1..=n`, ordered by length
/// and then lexicographically; `position` is the 1-based rank under that
/// order. The sign of label `A` at block `nu` tests bit `M - position(A)`
/// of `nu`, which makes any two distinct labels attain each of the four
/// sign pairs on exactly a quarter of the blocks.
#[derive(Debug, Clone, Serialize)]
pub struct LabelSet {
    k: u32,
    n: u32,
    m: u32,
}

impl LabelSet {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("branching k = {k} must be at least 2")));
        }
        let mut m: u128 = 0;
        for i in 1..=n {
            m += (k as u128).pow(i);
        }
        if m > 60 {
            return Err(Error::resource(format!(
                "label count M = {m} cannot index 2^M blocks in 64 bits"
            )));
        }
        Ok(LabelSet { k, n, m: m as u32 })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// 1-based rank of a branch label, by length then lexicographic order.
    pub fn position(&self, label: &[u8]) -> Result<u32> {
        let s = label.len() as u32;
        if s == 0 || s > self.n {
            return Err(Error::domain(format!(
                "label length {s} outside 1..={}",
                self.n
            )));
        }
        if label.iter().any(|&j| j == 0 || j as u32 > self.k) {
            return Err(Error::domain(format!("label {label:?} has entries outside 1..={}", self.k)));
        }
        let mut before: u64 = 0;
        for i in 1..s {
            before += (self.k as u64).pow(i);
        }
        let mut rank: u64 = 0;
        for (t, &j) in label.iter().enumerate() {
            rank += (j as u64 - 1) * (self.k as u64).pow(s - t as u32 - 1);
        }
        Ok((before + rank) as u32 + 1)
    }

    /// Rademacher sign of `label` at block `nu`. The empty label is the
    /// constant `+1`.
    pub fn rademacher(&self, label: &[u8], nu: u64) -> Result<i8> {
        if nu >= 1u64 << self.m {
            return Err(Error::domain(format!(
                "block index {nu} outside 0..2^{}",
                self.m
            )));
        }
        if label.is_empty() {
            return Ok(1);
        }
        let pos = self.position(label)?;
        let bit = self.m - pos;
        Ok(if (nu >> bit) & 1 == 0 { 1 } else { -1 })
    }
}

/// Layout of an embedding image: `2^M` blocks of length `2^(order+1)`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockLayout {
    /// log2 of the positive-half length: `n` for diamonds, `2n` for Laakso.
    pub order: u32,
    pub labels: LabelSet,
}

/// Default cap on the number of blocks an embedding may allocate.
pub const DEFAULT_BLOCK_BUDGET_LOG2: u32 = 20;

impl BlockLayout {
    pub fn diamond(n: u32, k: u32, budget_log2: u32) -> Result<Self> {
        Self::with_order(n, n, k, budget_log2)
    }

    pub fn laakso(n: u32, k: u32, budget_log2: u32) -> Result<Self> {
        Self::with_order(2 * n, n, k, budget_log2)
    }

    fn with_order(order: u32, n: u32, k: u32, budget_log2: u32) -> Result<Self> {
        let labels = LabelSet::new(k, n)?;
        if labels.m() > budget_log2 {
            return Err(Error::resource(format!(
                "M = {} exceeds the block budget 2^{budget_log2}; pass a larger budget to override",
                labels.m()
            )));
        }
        Ok(BlockLayout { order, labels })
    }

    pub fn block_len(&self) -> u64 {
        1u64 << (self.order + 1)
    }

    /// Length of the positive half of a block.
    pub fn half_len(&self) -> u64 {
        1u64 << self.order
    }

    pub fn block_count(&self) -> u64 {
        1u64 << self.labels.m()
    }

    /// Coordinate offset of block `nu`, i.e. the shift `S^(block_len * nu)`.
    pub fn block_offset(&self, nu: u64) -> u64 {
        nu * self.block_len()
    }

    pub fn total_len(&self) -> u64 {
        self.block_count() * self.block_len()
    }

    /// Reflection about the center of block `nu`.
    pub fn reflect_in_block(&self, nu: u64, iv: Interval) -> Interval {
        let off = self.block_offset(nu);
        debug_assert!(iv.lo > off && iv.hi <= off + self.block_len());
        let local = Interval::new(iv.lo - off, iv.hi - off);
        reflect(self.order, local).shifted(off)
    }

    /// Exhaustively counts sign pairs of two labels over all blocks; any two
    /// distinct labels must attain each pair on a quarter of the blocks.
    pub fn verify_independence(&self, a: &[u8], b: &[u8]) -> Result<bool> {
        let mut counts = [[0u64; 2]; 2];
        for nu in 0..self.block_count() {
            let ra = self.labels.rademacher(a, nu)?;
            let rb = self.labels.rademacher(b, nu)?;
            counts[(ra < 0) as usize][(rb < 0) as usize] += 1;
        }
        let quarter = self.block_count() / 4;
        Ok(counts.iter().flatten().all(|&c| c == quarter))
    }
}
