//! Exact rational quantities with a distinguished infinite value.
//!
//! Capacities may be infinite; demands, latencies and approximation factors
//! are always finite. Every comparison in the crate goes through these types so
//! that strict inequalities built into the gadgets survive exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number used for all demands, capacities and latencies.
pub type Rational = Ratio<i64>;

/// Builds `numer / denom`. Panics when `denom` is zero.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// Builds an integral rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(value)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{input}` as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

fn parse_err(input: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        input: input.to_string(),
        reason,
    }
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.125"`.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_err(input, "empty string"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| parse_err(input, "bad numerator"))?;
        let q: i64 = q.trim().parse().map_err(|_| parse_err(input, "bad denominator"))?;
        if q == 0 {
            return Err(parse_err(input, "zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return Err(parse_err(input, "bad decimal"));
        }
        let scale = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| parse_err(input, "too many decimal places"))?;
        let w: i64 = if whole_digits.is_empty() {
            0
        } else {
            whole_digits.parse().map_err(|_| parse_err(input, "bad decimal"))?
        };
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| parse_err(input, "bad decimal"))?
        };
        let magnitude = w
            .checked_mul(scale)
            .and_then(|v| v.checked_add(f))
            .ok_or_else(|| parse_err(input, "overflow"))?;
        let value = Rational::new(magnitude, scale);
        return Ok(if negative { -value } else { value });
    }
    s.parse::<i64>()
        .map(Rational::from_integer)
        .map_err(|_| parse_err(input, "not a number"))
}

/// Formats as `"p"` for integers and `"p/q"` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// A nonnegative capacity or bound that may be infinite.
///
/// `Finite` orders before `Infinite`, so `Infinite` absorbs every comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    Finite(Rational),
    Infinite,
}

impl Quantity {
    pub const INF: Quantity = Quantity::Infinite;

    pub fn finite(value: Rational) -> Self {
        Quantity::Finite(value)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Quantity::Infinite)
    }

    pub fn as_finite(&self) -> Option<Rational> {
        match self {
            Quantity::Finite(v) => Some(*v),
            Quantity::Infinite => None,
        }
    }

    /// `amount <= self`.
    pub fn admits(&self, amount: Rational) -> bool {
        match self {
            Quantity::Finite(v) => amount <= *v,
            Quantity::Infinite => true,
        }
    }

    /// Multiplies by a finite factor; infinity stays infinite.
    pub fn scaled(&self, factor: Rational) -> Quantity {
        match self {
            Quantity::Finite(v) => Quantity::Finite(*v * factor),
            Quantity::Infinite => Quantity::Infinite,
        }
    }

    /// Subtracts a finite amount; infinity stays infinite.
    pub fn minus(&self, amount: Rational) -> Quantity {
        match self {
            Quantity::Finite(v) => Quantity::Finite(*v - amount),
            Quantity::Infinite => Quantity::Infinite,
        }
    }

    pub fn plus(&self, amount: Rational) -> Quantity {
        match self {
            Quantity::Finite(v) => Quantity::Finite(*v + amount),
            Quantity::Infinite => Quantity::Infinite,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Quantity::Finite(v) if v.is_negative())
    }
}

impl From<Rational> for Quantity {
    fn from(value: Rational) -> Self {
        Quantity::Finite(value)
    }
}

impl From<i64> for Quantity {
    fn from(value: i64) -> Self {
        Quantity::Finite(Rational::from_integer(value))
    }
}

impl Default for Quantity {
    fn default() -> Self {
        Quantity::Finite(Rational::zero())
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Finite(v) => f.write_str(&format_rational(v)),
            Quantity::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Quantity {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "Infinity" | "infinity" | "∞" => Ok(Quantity::Infinite),
            other => parse_rational(other).map(Quantity::Finite),
        }
    }
}

fn serialize_rational<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_integer() {
        serializer.serialize_i64(*value.numer())
    } else {
        serializer.serialize_str(&format_rational(value))
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Finite(v) => serialize_rational(v, serializer),
            Quantity::Infinite => serializer.serialize_str("inf"),
        }
    }
}

struct QuantityVisitor;

impl<'de> Visitor<'de> for QuantityVisitor {
    type Value = Quantity;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer, a \"p/q\" string or \"inf\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
        Ok(Quantity::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
        i64::try_from(v)
            .map(Quantity::from)
            .map_err(|_| E::custom("integer out of range"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(QuantityVisitor)
    }
}

/// Serde adapter for finite rationals (`#[serde(with = "serde_rational")]`).
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serialize_rational(value, serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        match deserializer.deserialize_any(QuantityVisitor)? {
            Quantity::Finite(v) => Ok(v),
            Quantity::Infinite => Err(de::Error::custom("expected a finite rational")),
        }
    }
}

/// Returns true when the rational has a terminating decimal expansion.
pub fn has_exact_decimal(value: &Rational) -> bool {
    let mut d = *value.denom();
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    d == 1
}

/// Exact decimal rendering; `None` when the expansion does not terminate.
pub fn format_decimal(value: &Rational) -> Option<String> {
    if !has_exact_decimal(value) {
        return None;
    }
    if value.is_integer() {
        return Some(value.numer().to_string());
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let whole = abs.trunc().to_integer();
    let mut frac = abs.fract();
    let mut digits = String::new();
    while !frac.is_zero() {
        frac *= Rational::from_integer(10);
        let digit = frac.trunc().to_integer();
        digits.push(char::from(b'0' + digit as u8));
        frac = frac.fract();
    }
    Some(format!(
        "{}{}.{}",
        if negative { "-" } else { "" },
        whole,
        digits
    ))
}
