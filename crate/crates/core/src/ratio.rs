//! Exact rational scalars and their `"p/q"` text form.
//!
//! Every numeric quantity in this crate that is not a plain integer is a
//! `Ratio<i64>`. Reports additionally carry a decimal rendering for humans;
//! the exact form is always authoritative.

use num::rational::Ratio;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the crate.
pub type Rat = Ratio<i64>;

/// `p/q` as an exact rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Ratio::new(p, q)
}

/// An integer as an exact rational.
pub fn rat_int(p: i64) -> Rat {
    Ratio::from_integer(p)
}

/// Renders a rational as `"p"` or `"p/q"` in lowest terms.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"` or `"p/q"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = num
        .parse()
        .map_err(|_| Error::parse(format!("bad rational numerator in {s:?}")))?;
    let q: i64 = den
        .parse()
        .map_err(|_| Error::parse(format!("bad rational denominator in {s:?}")))?;
    if q == 0 {
        return Err(Error::parse(format!("zero denominator in {s:?}")));
    }
    Ok(Ratio::new(p, q))
}

/// Decimal approximation for report output. Exact fields stay `"p/q"`.
pub fn approx(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `|r|`.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

/// Smallest integer `>= r`.
pub fn rat_ceil(r: &Rat) -> i64 {
    r.ceil().to_integer()
}

/// Largest integer `<= r`.
pub fn rat_floor(r: &Rat) -> i64 {
    r.floor().to_integer()
}

/// Serde adapter serializing a [`Rat`] as its `"p/q"` string.
pub mod rat_serde {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Exact zero test that avoids constructing a temporary.
pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}
