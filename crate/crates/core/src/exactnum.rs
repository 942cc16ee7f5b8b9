//! Exact scalars.
//!
//! Every coefficient, field value and combinatorial count in the crate is an
//! arbitrary-precision integer or rational. Values are always kept in
//! canonical form (positive denominator, reduced), so equality is structural.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use num_bigint::{BigInt, BigUint};

/// Arbitrary-precision rational in canonical form.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to a negative power ({0})")]
    ZeroToNegativePower(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?} at byte {position}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub position: usize,
    pub reason: &'static str,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den`; panics if `den == 0`. Intended for literals.
pub fn ratio(num: i64, den: i64) -> Rational {
    assert!(den != 0, "ratio with zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_div(x: &Rational, y: &Rational) -> Result<Rational, ArithError> {
    if y.is_zero() {
        return Err(ArithError::DivisionByZero);
    }
    Ok(x / y)
}

/// Integer power, including negative exponents for nonzero bases.
/// `0^0` is `1`.
pub fn rat_pow(x: &Rational, e: i64) -> Result<Rational, ArithError> {
    if e < 0 && x.is_zero() {
        return Err(ArithError::ZeroToNegativePower(e));
    }
    let base = if e < 0 { x.recip() } else { x.clone() };
    Ok(pow_u64(&base, e.unsigned_abs()))
}

pub(crate) fn pow_u64(base: &Rational, mut e: u64) -> Rational {
    let mut acc = Rational::one();
    let mut sq = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Successive powers `x^0, x^1, ..., x^max`.
pub(crate) fn power_table(x: &Rational, max: usize) -> Vec<Rational> {
    let mut table = Vec::with_capacity(max + 1);
    table.push(Rational::one());
    for k in 1..=max {
        let next = &table[k - 1] * x;
        table.push(next);
    }
    table
}

/// Parses `[-]digits` or `[-]digits/digits`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let fail = |position: usize, reason: &'static str| ParseRationalError {
        text: text.to_owned(),
        position,
        reason,
    };
    let bytes = text.as_bytes();
    let negative = bytes.first() == Some(&b'-');
    let start = usize::from(negative);
    let (num_text, den_text, den_start) = match text[start..].find('/') {
        Some(slash) => (
            &text[start..start + slash],
            Some(&text[start + slash + 1..]),
            start + slash + 1,
        ),
        None => (&text[start..], None, text.len()),
    };
    let digits = |s: &str, offset: usize| -> Result<BigInt, ParseRationalError> {
        if s.is_empty() {
            return Err(fail(offset, "expected digits"));
        }
        if let Some(bad) = s.bytes().position(|b| !b.is_ascii_digit()) {
            return Err(fail(offset + bad, "unexpected character"));
        }
        Ok(s.parse::<BigInt>().expect("ascii digits parse"))
    };
    let mut num = digits(num_text, start)?;
    if negative {
        num = -num;
    }
    let den = match den_text {
        Some(d) => digits(d, den_start)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(fail(den_start, "zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `num` when integral, `num/den` otherwise.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}
