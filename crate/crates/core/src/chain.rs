//! The balanced carries Markov chain, built exactly.
//!
//! `K(i,j)` is the chance that carry `i` into a column of `n` uniform
//! balanced digits produces carry `j` out. Two closed forms are provided
//! (a coefficient of a power of `1 + x + … + x^(b-1)` and an alternating
//! binomial sum) together with a direct-enumeration oracle and the
//! classical-digit chain on `{0, …, n-1}`.

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{check_odd_base, invalid, Error, Result};
use crate::linalg::{identity, mat_mul, QMatrix};
use crate::numeral::half;
use crate::poly;
use crate::rational::Rational;

/// Default cap on the number of digit tuples an oracle may enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_ENUMERATION_BUDGET`].
pub const BUDGET_ENV: &str = "CARRIES_ENUM_BUDGET";

pub fn enumeration_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ENUMERATION_BUDGET)
}

pub(crate) fn check_budget(b: u64, len: usize, budget: u64) -> Result<u64> {
    let required = (b as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(required as u64)
    }
}

/// Exact square stochastic matrix over carry states.
///
/// Storage index `t` holds carry state `t - offset`; all accessors take
/// the carry state itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarriesMatrix {
    n: usize,
    base: BigUint,
    offset: i64,
    entries: QMatrix,
}

impl CarriesMatrix {
    pub fn from_parts(n: usize, base: BigUint, offset: i64, entries: QMatrix) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 || entries.iter().any(|r| r.len() != dim) {
            return invalid("carries matrix must be square and non-empty");
        }
        Ok(Self { n, base, offset, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &BigUint {
        &self.base
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn states(&self) -> RangeInclusive<i64> {
        -self.offset..=self.dim() as i64 - 1 - self.offset
    }

    pub fn entries(&self) -> &QMatrix {
        &self.entries
    }

    /// Transition probability from carry `i` to carry `j`.
    pub fn get(&self, i: i64, j: i64) -> &Rational {
        &self.entries[self.index(i)][self.index(j)]
    }

    pub fn row(&self, i: i64) -> &[Rational] {
        &self.entries[self.index(i)]
    }

    fn index(&self, state: i64) -> usize {
        let t = state + self.offset;
        assert!(
            (0..self.dim() as i64).contains(&t),
            "carry state {state} outside {:?}",
            self.states()
        );
        t as usize
    }

    pub fn is_stochastic(&self) -> bool {
        self.entries.iter().all(|row| {
            row.iter().all(|x| !x.is_negative())
                && row.iter().fold(Rational::zero(), |a, x| a + x).is_one()
        })
    }

    /// True when `K(i,j) = K(-i,-j)` wherever both states exist.
    pub fn is_negation_symmetric(&self) -> bool {
        let states = self.states();
        states.clone().all(|i| {
            states.clone().all(|j| {
                !states.contains(&-i)
                    || !states.contains(&-j)
                    || self.get(i, j) == self.get(-i, -j)
            })
        })
    }

    /// True when every denominator divides `base^n`.
    pub fn denominators_divide_base_power(&self) -> bool {
        let bn = BigInt::from(self.base.clone()).pow(self.n as u32);
        self.entries
            .iter()
            .flatten()
            .all(|x| (&bn % x.denom()).is_zero())
    }
}

fn validate(n: usize, b: u64) -> Result<()> {
    check_odd_base(b)?;
    if n == 0 {
        return invalid("operand count n must be >= 1");
    }
    Ok(())
}

/// Storage offset: `n/2` for even `n`, `(n-1)/2` for odd `n`.
pub fn offset_for(n: usize) -> i64 {
    (n / 2) as i64
}

fn build(n: usize, b: u64, mut entry: impl FnMut(i64, i64) -> Rational) -> CarriesMatrix {
    let offset = offset_for(n);
    let states: Vec<i64> = (-offset..=n as i64 - offset).collect();
    let entries = states
        .iter()
        .map(|&i| states.iter().map(|&j| entry(i, j)).collect())
        .collect();
    CarriesMatrix { n, base: BigUint::from(b), offset, entries }
}

/// Index `jb + (n+1)(b-1)/2 - i` at which both closed forms read off `K(i,j)`.
fn exponent(n: usize, b: u64, i: i64, j: i64) -> i64 {
    j * b as i64 + (n as i64 + 1) * half(b) - i
}

/// `K(i,j) = [x^(jb + (n+1)(b-1)/2 - i)] (1 + x + … + x^(b-1))^(n+1) / b^n`.
pub fn transition_matrix(n: usize, b: u64) -> Result<CarriesMatrix> {
    validate(n, b)?;
    let p = poly::pow(&poly::ones(b as usize), n as u32 + 1);
    let denom = BigInt::from(b).pow(n as u32);
    Ok(build(n, b, |i, j| {
        Rational::new(poly::coeff(&p, exponent(n, b, i, j)), denom.clone())
    }))
}

/// The same matrix via
/// `b^-n Σ_l (-1)^l C(n+1,l) C(n + e - lb, n)`, `e = jb + (n+1)(b-1)/2 - i`,
/// with `l` running up to `⌊e / b⌋`.
pub fn transition_matrix_binomial(n: usize, b: u64) -> Result<CarriesMatrix> {
    validate(n, b)?;
    let denom = BigInt::from(b).pow(n as u32);
    let bi = b as i64;
    let nn = BigInt::from(n);
    Ok(build(n, b, |i, j| {
        let e = exponent(n, b, i, j);
        let top = e.div_euclid(bi).min(n as i64 + 1);
        let mut acc = BigInt::zero();
        for l in 0..=top {
            let term = binomial(BigInt::from(n + 1), BigInt::from(l))
                * binomial(&nn + e - l * bi, nn.clone());
            if l % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Rational::new(acc, denom.clone())
    }))
}

/// Calls `f` on every tuple in `[lo, hi]^len`.
pub(crate) fn for_each_tuple(lo: i64, hi: i64, len: usize, mut f: impl FnMut(&[i64])) {
    let mut t = vec![lo; len];
    loop {
        f(&t);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if t[k] < hi {
                t[k] += 1;
                break;
            }
            t[k] = lo;
        }
    }
}

/// Direct enumeration of all `b^n` digit columns, using the default budget.
pub fn brute_force_matrix(n: usize, b: u64) -> Result<CarriesMatrix> {
    brute_force_matrix_within(n, b, enumeration_budget())
}

pub fn brute_force_matrix_within(n: usize, b: u64, budget: u64) -> Result<CarriesMatrix> {
    validate(n, b)?;
    let total = check_budget(b, n, budget)?;
    let h = half(b);
    let bi = b as i64;
    let offset = offset_for(n);
    let dim = n + 1;
    let mut counts = vec![vec![0u64; dim]; dim];
    let mut escaped = false;
    for_each_tuple(-h, h, n, |xs| {
        let s: i64 = xs.iter().sum();
        for (t, row) in counts.iter_mut().enumerate() {
            let i = t as i64 - offset;
            // carry j iff jb - h <= i + s <= jb + h
            let j = (i + s + h).div_euclid(bi);
            match usize::try_from(j + offset).ok().filter(|&u| u < dim) {
                Some(u) => row[u] += 1,
                None => escaped = true,
            }
        }
    });
    if escaped {
        return Err(Error::InvariantViolation(
            "carry left the state space during enumeration".into(),
        ));
    }
    let entries = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| Rational::new(c.into(), total.into()))
                .collect()
        })
        .collect();
    Ok(CarriesMatrix { n, base: BigUint::from(b), offset, entries })
}

/// Classical-digit carries chain on `{0, …, n-1}` for any base `b >= 2`.
pub fn holte_matrix(n: usize, b: u64) -> Result<CarriesMatrix> {
    if b < 2 {
        return Err(Error::InvalidBase(b));
    }
    if n == 0 {
        return invalid("operand count n must be >= 1");
    }
    let p = poly::pow(&poly::ones(b as usize), n as u32);
    let denom = BigInt::from(b).pow(n as u32);
    let bi = b as i64;
    let entries = (0..n as i64)
        .map(|i| {
            (0..n as i64)
                .map(|j| {
                    // jb <= i + Σx <= jb + b - 1
                    let lo = j * bi - i;
                    let count: BigInt = (lo..lo + bi).map(|s| poly::coeff(&p, s)).sum();
                    Rational::new(count, denom.clone())
                })
                .collect()
        })
        .collect();
    Ok(CarriesMatrix { n, base: BigUint::from(b), offset: 0, entries })
}

/// Exact product; the result's base is the product of the bases.
pub fn matrix_product(a: &CarriesMatrix, b: &CarriesMatrix) -> Result<CarriesMatrix> {
    if a.n != b.n || a.offset != b.offset || a.dim() != b.dim() {
        return invalid(format!(
            "dimension mismatch: (n={}, offset={}, dim={}) vs (n={}, offset={}, dim={})",
            a.n,
            a.offset,
            a.dim(),
            b.n,
            b.offset,
            b.dim()
        ));
    }
    Ok(CarriesMatrix {
        n: a.n,
        base: &a.base * &b.base,
        offset: a.offset,
        entries: mat_mul(&a.entries, &b.entries),
    })
}

/// `K^r` by repeated squaring. `K^0` is the identity with base 1.
pub fn matrix_power(k: &CarriesMatrix, mut r: u32) -> CarriesMatrix {
    let mut acc = CarriesMatrix {
        n: k.n,
        base: BigUint::one(),
        offset: k.offset,
        entries: identity(k.dim()),
    };
    let mut sq = k.clone();
    while r > 0 {
        if r & 1 == 1 {
            acc = matrix_product(&acc, &sq).expect("shapes agree");
        }
        r >>= 1;
        if r > 0 {
            sq = matrix_product(&sq, &sq).expect("shapes agree");
        }
    }
    acc
}
