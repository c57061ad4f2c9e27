//! Exact rational helpers: the `p/q` text format, exact decimal parsing,
//! continued-fraction rationalization, and the [`Scalar`] abstraction that
//! lets the contraction engine run over either `BigRational` or `f64`.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("decimal literal `{0}` given where a p/q rational is required")]
    DecimalNotAllowed(String),
}

/// Parses `p/q` or an integer `p`. Decimals are rejected.
pub fn parse_rational(text: &str) -> Result<BigRational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    if text.contains('.') || text.contains('e') || text.contains('E') {
        return Err(RationalParseError::DecimalNotAllowed(text.to_string()));
    }
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| RationalParseError::Malformed(text.to_string()))?;
    let den = BigInt::from_str(den).map_err(|_| RationalParseError::Malformed(text.to_string()))?;
    if den.is_zero() {
        return Err(RationalParseError::ZeroDenominator(text.to_string()));
    }
    Ok(BigRational::new(num, den))
}

/// Parses `p/q`, an integer, or a plain decimal such as `0.35` or `-1.5e-3`.
/// Decimals are converted exactly (`0.3` is `3/10`, not the nearest double).
pub fn parse_rational_or_decimal(text: &str) -> Result<BigRational, RationalParseError> {
    match parse_rational(text) {
        Err(RationalParseError::DecimalNotAllowed(_)) => parse_decimal(text),
        other => other,
    }
}

fn parse_decimal(text: &str) -> Result<BigRational, RationalParseError> {
    let text = text.trim();
    let malformed = || RationalParseError::Malformed(text.to_string());
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..].parse().map_err(|_| malformed())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| malformed())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Renders a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &BigRational) -> f64 {
    ToPrimitive::to_f64(value).unwrap_or_else(|| if value.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Exact value of a finite double.
pub fn from_f64(value: f64) -> BigRational {
    BigRational::from_float(value).expect("finite float")
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued-fraction convergents and the final semiconvergent.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    assert!(x.is_finite(), "cannot rationalize a non-finite value");
    assert!(max_den >= 1);
    let target = from_f64(x);
    let max = BigInt::from(max_den);
    let mut rest = target.clone();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_pp, mut q_pp) = (BigInt::zero(), BigInt::one());
    loop {
        let a = rest.floor().to_integer();
        let q = &a * &q_prev + &q_pp;
        if q > max {
            let current = BigRational::new(p_prev.clone(), q_prev.clone());
            let t = (&max - &q_pp) / &q_prev;
            if t.is_zero() {
                return current;
            }
            let semi = BigRational::new(&t * &p_prev + &p_pp, &t * &q_prev + &q_pp);
            return if (&semi - &target).abs() < (&current - &target).abs() { semi } else { current };
        }
        let p = &a * &p_prev + &p_pp;
        p_pp = std::mem::replace(&mut p_prev, p);
        q_pp = std::mem::replace(&mut q_prev, q);
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return BigRational::new(p_prev, q_prev);
        }
        rest = frac.recip();
    }
}

/// Arithmetic the contraction engine needs; implemented for exact rationals
/// and for doubles.
pub trait Scalar:
    Clone + Zero + One + PartialOrd + fmt::Debug + Send + Sync + Add<Output = Self> + Mul<Output = Self>
{
    /// The value `1/n`.
    fn recip_of(n: usize) -> Self;
    fn to_f64(&self) -> f64;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
}

impl Scalar for f64 {
    fn recip_of(n: usize) -> Self {
        1.0 / n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

impl Scalar for BigRational {
    fn recip_of(n: usize) -> Self {
        BigRational::new(BigInt::one(), BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

/// Serde adapter for `BigRational` as a `"p/q"` string.
pub mod serde_pq {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// [`serde_pq`] for an optional value; `None` is `null`.
pub mod serde_pq_opt {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_str(&super::format_rational(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|text| super::parse_rational(&text).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-3").unwrap(), ratio(-3, 1));
        assert_eq!(parse_rational("0").unwrap(), ratio(0, 1));
    }

    #[test]
    fn rejects_bad_literals() {
        assert_eq!(parse_rational(""), Err(RationalParseError::Empty));
        assert!(matches!(parse_rational("1/0"), Err(RationalParseError::ZeroDenominator(_))));
        assert!(matches!(parse_rational("a/b"), Err(RationalParseError::Malformed(_))));
        assert!(matches!(parse_rational("0.5"), Err(RationalParseError::DecimalNotAllowed(_))));
    }

    #[test]
    fn decimals_convert_exactly() {
        assert_eq!(parse_rational_or_decimal("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational_or_decimal("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational_or_decimal("2.5e-2").unwrap(), ratio(1, 40));
        assert_eq!(parse_rational_or_decimal(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational_or_decimal("7/3").unwrap(), ratio(7, 3));
        assert!(parse_rational_or_decimal("1.2.3").is_err());
    }

    #[test]
    fn format_round_trips() {
        for text in ["1/8", "0", "-7/3", "12"] {
            assert_eq!(format_rational(&parse_rational(text).unwrap()), text);
        }
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.5, 1_000_000), ratio(1, 2));
        assert_eq!(rationalize(1.0 / 3.0, 1_000_000), ratio(1, 3));
        assert_eq!(rationalize(-2.0 / 7.0, 1_000_000), ratio(-2, 7));
        assert_eq!(rationalize(3.0, 10), ratio(3, 1));
        assert_eq!(rationalize(std::f64::consts::PI, 1000), ratio(355, 113));
        assert_eq!(rationalize(0.0, 5), ratio(0, 1));
    }

    #[test]
    fn rationalize_respects_denominator_bound() {
        let mut x = 0.123_456_789_f64;
        for _ in 0..50 {
            let r = rationalize(x, 1_000_000);
            assert!(r.denom() <= &BigInt::from(1_000_000));
            assert!((to_f64(&r) - x).abs() < 1e-6);
            x = (x * 7.3 + 0.11) % 1.0;
        }
    }
}
