//! Exact rational helpers. Every length, offset and function value in the
//! crate is a `BigRational`; these functions keep construction, parsing and
//! printing uniform.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `n`, `n/d` or `-n/d`.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad rational `{s}`"))?;
    let den: BigInt = den.parse().map_err(|_| format!("bad rational `{s}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Q::new(num, den))
}

/// Always prints `num/den`, including integers (`3/1`).
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}


/// Serde adapter storing a rational as its `num/den` string.
pub mod serde_str {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(D::Error::custom)
    }
}
