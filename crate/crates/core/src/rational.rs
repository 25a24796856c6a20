//! Exact rational helpers on top of `num-rational`.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parse `"p/q"` or a bare integer.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    match text.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => BigInt::from_str(text).ok().map(Rational::from_integer),
    }
}

/// Canonical `"p/q"` rendering (`"p"` when the denominator is 1 is *not*
/// used, so every value round-trips through the same shape).
pub fn format(value: &Rational) -> String {
    alloc::format!("{}/{}", value.numer(), value.denom())
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Rescale rationals to integers over their least common denominator.
///
/// Returns the integer numerators and the common denominator.
pub fn common_denominator(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let lcm = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled = values
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    (scaled, lcm)
}

/// Best-effort `i128` conversion when every value is comfortably small.
///
/// `bound_bits` is the largest bit length accepted for any single value; the
/// caller picks it so that the products it forms cannot overflow.
pub fn to_small_ints(values: &[BigInt], bound_bits: u64) -> Option<Vec<i128>> {
    values
        .iter()
        .map(|v| {
            if v.bits() > bound_bits {
                None
            } else {
                v.to_i128()
            }
        })
        .collect()
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && value <= &Rational::one()
}
