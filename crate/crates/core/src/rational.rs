//! Exact rational helpers. Every load in the crate is a [`Q`].

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: usize) -> Q {
    Q::from_integer(n as i64)
}

/// Parses `"p/q"` or `"p"`. The result is reduced.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: i64 = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(num, den))
}

/// Canonical text form: reduced `p/q`, or `p` when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn floor(x: &Q) -> i64 {
    Integer::div_floor(x.numer(), x.denom())
}

pub fn ceil(x: &Q) -> i64 {
    -Integer::div_floor(&-x.numer(), x.denom())
}

/// Least common multiple of `1..=n`.
pub fn lcm_upto(n: usize) -> i64 {
    (1..=n as i64).fold(1, |acc, x| acc.lcm(&x))
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Serde adapter storing a [`Q`] as its canonical string.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Same as [`serde_q`] for `Option<Q>`.
pub mod serde_opt_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&fmt_q(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Q>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_q(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
