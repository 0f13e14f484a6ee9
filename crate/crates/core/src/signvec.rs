//! Finitely supported exact-rational sequences stored as runs.
//!
//! Coordinates are 1-based. A vector is a sorted list of disjoint maximal
//! runs of constant nonzero value; embedding images are `{-1, +1}`-valued,
//! obstruction inputs may carry arbitrary rationals. Both norms are computed
//! per run, so a vector with millions of coordinates but few value changes
//! stays cheap.

use std::fmt;

use num::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ratio::{format_rat, parse_rat, rat_int, Rat};

/// A maximal run of constant nonzero value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    /// First coordinate of the run (1-based).
    pub start: u64,
    /// Number of coordinates covered, at least 1.
    pub len: u64,
    /// Common value, nonzero.
    pub val: Rat,
}

impl Run {
    pub fn new(start: u64, len: u64, val: Rat) -> Self {
        debug_assert!(start >= 1 && len >= 1);
        Run { start, len, val }
    }

    /// Last coordinate of the run (inclusive).
    pub fn end(&self) -> u64 {
        self.start + self.len - 1
    }
}

/// A finitely supported sequence of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignVector {
    runs: Vec<Run>,
}

/// Accumulates runs in coordinate order, dropping zeros and merging
/// adjacent runs of equal value so the result is canonical.
#[derive(Default)]
pub struct RunBuilder {
    runs: Vec<Run>,
}

impl RunBuilder {
    pub fn new() -> Self {
        RunBuilder::default()
    }

    /// Appends a run; `start` must be past the end of everything pushed so far.
    pub fn push(&mut self, start: u64, len: u64, val: Rat) {
        if len == 0 || val.is_zero() {
            return;
        }
        if let Some(last) = self.runs.last_mut() {
            assert!(
                start > last.end(),
                "runs must be pushed in coordinate order"
            );
            if last.end() + 1 == start && last.val == val {
                last.len += len;
                return;
            }
        }
        self.runs.push(Run::new(start, len, val));
    }

    pub fn finish(self) -> SignVector {
        SignVector { runs: self.runs }
    }
}

impl SignVector {
    pub fn zero() -> Self {
        SignVector::default()
    }

    /// Builds from arbitrary runs. Fails on overlaps; normalizes order,
    /// zero values, and mergeable neighbours.
    pub fn from_runs(mut runs: Vec<Run>) -> Result<Self> {
        runs.retain(|r| !r.val.is_zero() && r.len > 0);
        runs.sort_by_key(|r| r.start);
        for w in runs.windows(2) {
            if w[1].start <= w[0].end() {
                return Err(Error::domain(format!(
                    "overlapping runs at coordinates {}..={} and {}..={}",
                    w[0].start,
                    w[0].end(),
                    w[1].start,
                    w[1].end()
                )));
            }
        }
        let mut b = RunBuilder::new();
        for r in runs {
            b.push(r.start, r.len, r.val);
        }
        Ok(b.finish())
    }

    /// Dense 1-based construction; zeros in `coeffs` become gaps.
    pub fn from_coeffs(coeffs: &[Rat]) -> Self {
        let mut b = RunBuilder::new();
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                b.push(i as u64 + 1, 1, *c);
            }
        }
        b.finish()
    }

    /// Indicator of `lo..=hi` scaled by `val`.
    pub fn indicator(lo: u64, hi: u64, val: Rat) -> Self {
        assert!(lo >= 1 && lo <= hi);
        let mut b = RunBuilder::new();
        b.push(lo, hi - lo + 1, val);
        b.finish()
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_zero(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of nonzero coordinates.
    pub fn support_size(&self) -> u64 {
        self.runs.iter().map(|r| r.len).sum()
    }

    /// Largest coordinate of the support, 0 for the zero vector.
    pub fn max_support(&self) -> u64 {
        self.runs.last().map_or(0, Run::end)
    }

    /// Value at a coordinate (1-based).
    pub fn value_at(&self, coord: u64) -> Rat {
        match self.runs.binary_search_by(|r| {
            if coord < r.start {
                std::cmp::Ordering::Greater
            } else if coord > r.end() {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(i) => self.runs[i].val,
            Err(_) => rat_int(0),
        }
    }

    /// Dense rendering of coordinates `1..=upto`.
    pub fn to_dense(&self, upto: u64) -> Vec<Rat> {
        let mut out = vec![rat_int(0); upto as usize];
        for r in &self.runs {
            for c in r.start..=r.end().min(upto) {
                out[c as usize - 1] = r.val;
            }
        }
        out
    }

    /// `self + c * other`, by a two-pointer sweep over the run lists.
    pub fn add_scaled(&self, other: &SignVector, c: Rat) -> SignVector {
        if c.is_zero() {
            return self.clone();
        }
        let mut b = RunBuilder::new();
        let mut ra = self.runs.iter().cloned();
        let mut rb = other.runs.iter().map(|r| Run::new(r.start, r.len, r.val * c));
        let mut a = ra.next();
        let mut bb = rb.next();
        loop {
            match (a.take(), bb.take()) {
                (None, None) => break,
                (Some(x), None) => {
                    b.push(x.start, x.len, x.val);
                    a = ra.next();
                    bb = None;
                }
                (None, Some(y)) => {
                    b.push(y.start, y.len, y.val);
                    a = None;
                    bb = rb.next();
                }
                (Some(x), Some(y)) => {
                    if x.end() < y.start {
                        b.push(x.start, x.len, x.val);
                        a = ra.next();
                        bb = Some(y);
                    } else if y.end() < x.start {
                        b.push(y.start, y.len, y.val);
                        a = Some(x);
                        bb = rb.next();
                    } else if x.start < y.start {
                        let head = y.start - x.start;
                        b.push(x.start, head, x.val);
                        a = Some(Run::new(y.start, x.len - head, x.val));
                        bb = Some(y);
                    } else if y.start < x.start {
                        let head = x.start - y.start;
                        b.push(y.start, head, y.val);
                        bb = Some(Run::new(x.start, y.len - head, y.val));
                        a = Some(x);
                    } else {
                        let l = x.len.min(y.len);
                        b.push(x.start, l, x.val + y.val);
                        a = if x.len > l {
                            Some(Run::new(x.start + l, x.len - l, x.val))
                        } else {
                            ra.next()
                        };
                        bb = if y.len > l {
                            Some(Run::new(y.start + l, y.len - l, y.val))
                        } else {
                            rb.next()
                        };
                    }
                }
            }
        }
        b.finish()
    }

    pub fn add(&self, other: &SignVector) -> SignVector {
        self.add_scaled(other, rat_int(1))
    }

    pub fn sub(&self, other: &SignVector) -> SignVector {
        self.add_scaled(other, rat_int(-1))
    }

    pub fn neg(&self) -> SignVector {
        self.scale(rat_int(-1))
    }

    pub fn scale(&self, c: Rat) -> SignVector {
        if c.is_zero() {
            return SignVector::zero();
        }
        SignVector {
            runs: self
                .runs
                .iter()
                .map(|r| Run::new(r.start, r.len, r.val * c))
                .collect(),
        }
    }

    /// The shift `S^t`: coordinate `i` maps to `i + t`.
    pub fn shift(&self, t: u64) -> SignVector {
        SignVector {
            runs: self
                .runs
                .iter()
                .map(|r| Run::new(r.start + t, r.len, r.val))
                .collect(),
        }
    }

    /// The l1 norm: sum of absolute values.
    pub fn l1_norm(&self) -> Rat {
        let mut acc = rat_int(0);
        for r in &self.runs {
            acc += r.val.abs() * rat_int(r.len as i64);
        }
        acc
    }

    /// The summing norm: `sup_k |a_1 + ... + a_k|`.
    ///
    /// Within a constant-value run the prefix sum is monotone, so only the
    /// two ends of each run can realize the supremum.
    pub fn summing_norm(&self) -> Rat {
        let mut running = rat_int(0);
        let mut best = rat_int(0);
        for r in &self.runs {
            let first = running + r.val;
            let last = running + r.val * rat_int(r.len as i64);
            for cand in [first.abs(), last.abs()] {
                if cand > best {
                    best = cand;
                }
            }
            running = last;
        }
        best
    }

    /// Fixed-width `+-0` rendering of coordinates `1..=upto`; values other
    /// than `0, +1, -1` render as `?`.
    pub fn to_pattern(&self, upto: u64) -> String {
        let one = rat_int(1);
        self.to_dense(upto)
            .iter()
            .map(|v| {
                if *v == one {
                    '+'
                } else if *v == -one {
                    '-'
                } else if v.is_zero() {
                    '0'
                } else {
                    '?'
                }
            })
            .collect()
    }

    /// Dense two-column TSV (`coordinate\tvalue`) of coordinates `1..=upto`.
    pub fn to_tsv(&self, upto: u64) -> String {
        let mut out = String::new();
        for (i, v) in self.to_dense(upto).iter().enumerate() {
            out.push_str(&format!("{}\t{}\n", i + 1, format_rat(v)));
        }
        out
    }
}

impl fmt::Display for SignVector {
    /// Compact `+-0` rendering for `{0,+1,-1}`-valued vectors, runs otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let upto = self.max_support().min(256);
        let one = rat_int(1);
        if self
            .runs
            .iter()
            .all(|r| r.val == one || r.val == -one)
        {
            for v in self.to_dense(upto) {
                if v == one {
                    write!(f, "+")?;
                } else if v == -one {
                    write!(f, "-")?;
                } else {
                    write!(f, "0")?;
                }
            }
            Ok(())
        } else {
            write!(f, "{:?}", self.runs)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RunJson {
    start: u64,
    len: u64,
    val: String,
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<RunJson> = self
            .runs
            .iter()
            .map(|r| RunJson {
                start: r.start,
                len: r.len,
                val: format_rat(&r.val),
            })
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<RunJson>::deserialize(de)?;
        let runs = rows
            .into_iter()
            .map(|r| Ok(Run::new(r.start, r.len, parse_rat(&r.val).map_err(D::Error::custom)?)))
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        SignVector::from_runs(runs).map_err(D::Error::custom)
    }
}
