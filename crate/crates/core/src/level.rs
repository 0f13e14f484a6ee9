//! Vertex levels and their dyadic / tetradic digit expansions.
//!
//! A level is a rational in `[0, 1]` written in base 2 (diamonds) or base 4
//! (Laakso graphs) as `sum of digit[a] / base^a` for `a = 0..=depth`. The
//! canonical form keeps the last digit nonzero (except for level 0, stored
//! as the single digit 0), and `digit[0] != 0` only for level 1.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::ratio::{rat, Rat};

/// Base of a level expansion: 2 for diamonds, 4 for Laakso graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Dyadic,
    Tetradic,
}

impl Base {
    pub fn radix(self) -> u64 {
        match self {
            Base::Dyadic => 2,
            Base::Tetradic => 4,
        }
    }

    /// `radix^n`, checked against u64 range.
    pub fn pow(self, n: u32) -> u64 {
        self.radix()
            .checked_pow(n)
            .expect("level denominator overflows u64")
    }
}

/// A level in `[0, 1]` with its canonical digit expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Level {
    base: Base,
    /// `digits[a]` is the coefficient of `base^-a`; see the module docs for
    /// the canonical-form rules.
    digits: Vec<u8>,
}

impl Level {
    pub fn zero(base: Base) -> Self {
        Level { base, digits: vec![0] }
    }

    pub fn one(base: Base) -> Self {
        Level { base, digits: vec![1] }
    }

    /// Builds the level `units / base^n`, trimming to canonical form.
    pub fn from_units(base: Base, units: u64, n: u32) -> Result<Self> {
        let denom = base.pow(n);
        if units > denom {
            return Err(Error::domain(format!(
                "level {units}/{denom} exceeds 1"
            )));
        }
        if units == denom {
            return Ok(Level::one(base));
        }
        let radix = base.radix();
        let mut digits = vec![0u8; n as usize + 1];
        let mut rest = units;
        for a in (1..=n as usize).rev() {
            digits[a] = (rest % radix) as u8;
            rest /= radix;
        }
        debug_assert_eq!(rest, 0);
        while digits.len() > 1 && *digits.last().unwrap() == 0 {
            digits.pop();
        }
        Ok(Level { base, digits })
    }

    /// The digit expansion of an exact rational at depth bound `n`.
    ///
    /// Fails unless `0 <= value <= 1` and `value * base^n` is an integer.
    pub fn expansion(base: Base, value: Rat, n: u32) -> Result<Self> {
        if value < rat(0, 1) || value > rat(1, 1) {
            return Err(Error::domain(format!(
                "level {value} outside [0, 1]"
            )));
        }
        let denom = base.pow(n);
        let scaled = value * rat(denom as i64, 1);
        if !scaled.is_integer() {
            return Err(Error::domain(format!(
                "{value} is not representable at depth {n} in base {}",
                base.radix()
            )));
        }
        Level::from_units(base, scaled.to_integer() as u64, n)
    }

    pub fn base(&self) -> Base {
        self.base
    }

    /// Depth of the expansion: `s(level)` for base 2, `t(level)` for base 4.
    /// Zero and one both have depth 0.
    pub fn depth(&self) -> u32 {
        (self.digits.len() - 1) as u32
    }

    /// Digit at position `a` (0 beyond the stored depth).
    pub fn digit(&self, a: u32) -> u8 {
        self.digits.get(a as usize).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.digits == [0]
    }

    pub fn is_one(&self) -> bool {
        self.digits == [1]
    }

    /// Exact value as a rational.
    pub fn value(&self) -> Rat {
        let mut acc = rat(0, 1);
        let radix = self.base.radix() as i64;
        for (a, &d) in self.digits.iter().enumerate() {
            if d != 0 {
                acc += rat(d as i64, radix.pow(a as u32));
            }
        }
        acc
    }

    /// Value in units of `base^-n`. Requires `depth <= n`.
    pub fn units(&self, n: u32) -> u64 {
        assert!(self.depth() <= n, "level deeper than requested unit scale");
        let radix = self.base.radix();
        let mut acc = 0u64;
        for (a, &d) in self.digits.iter().enumerate() {
            acc += d as u64 * radix.pow(n - a as u32);
        }
        acc
    }

    /// The truncation `R_tau(level)`: the partial sum of digits `0..=tau`,
    /// re-trimmed to canonical form.
    pub fn truncate(&self, tau: u32) -> Level {
        let mut digits: Vec<u8> = self
            .digits
            .iter()
            .take(tau as usize + 1)
            .copied()
            .collect();
        while digits.len() > 1 && *digits.last().unwrap() == 0 {
            digits.pop();
        }
        Level { base: self.base, digits }
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    /// Numeric order. On canonical digit strings this is plain lexicographic
    /// comparison padded with zeros.
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.base, other.base, "comparing levels of different bases");
        let len = self.digits.len().max(other.digits.len());
        for a in 0..len {
            match self.digit(a as u32).cmp(&other.digit(a as u32)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Level {
    /// Prints the exact fraction `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::ratio::format_rat(&self.value()))
    }
}
