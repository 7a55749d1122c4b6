//! Exact rational carrier and its `p/q` text form.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational as Rational;

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn from_int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// Formats as reduced `p/q`, always with an explicit denominator (`0/1`, `3/1`).
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_pq(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// Lossy conversion for reporting.
pub fn to_f64(r: &Rational) -> f64 {
    // Shift large operands down so the quotient survives f64 range.
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    let excess = n.bits().max(d.bits()).saturating_sub(1000);
    if excess > 0 {
        n >>= excess;
        d >>= excess;
        if d.is_zero() {
            return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
    }
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

pub fn abs(r: &Rational) -> Rational {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}
