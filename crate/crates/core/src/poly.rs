//! Dense integer polynomials, lowest degree first.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub type IntPoly = Vec<BigInt>;

pub fn mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `p^e` by repeated squaring.
pub fn pow(p: &[BigInt], mut e: u32) -> IntPoly {
    let mut base: IntPoly = p.to_vec();
    let mut acc: IntPoly = vec![BigInt::one()];
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

/// `1 + x + ... + x^(len-1)`.
pub fn ones(len: usize) -> IntPoly {
    vec![BigInt::one(); len]
}

/// Coefficient of `x^k`, zero outside the support (including negative `k`).
pub fn coeff(p: &[BigInt], k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    p.get(k as usize).cloned().unwrap_or_else(BigInt::zero)
}

/// Product of monic linear factors `(x + r)` over the given roots-with-sign.
pub fn linear_product<I: IntoIterator<Item = BigInt>>(shifts: I) -> IntPoly {
    shifts
        .into_iter()
        .fold(vec![BigInt::one()], |acc, r| mul(&acc, &[r, BigInt::one()]))
}
