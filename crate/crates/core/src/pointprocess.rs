//! Carries down a single column of iid balanced digits.
//!
//! With running remainders `R_1, R_2, …` (iid uniform on the digit set),
//! a carry of `+b` sits between `R_i` and `R_{i+1}` iff
//! `R_i - R_{i+1} >= (b+1)/2`, a carry of `-b` iff `R_i - R_{i+1} <= -(b+1)/2`.
//! The 0/1 carry indicators form a stationary one-dependent process whose
//! finite patterns are determinants in the run probabilities
//! `a_i = P(i-1 consecutive carries)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use crate::chain::{check_budget, enumeration_budget, for_each_tuple};
use crate::error::{check_odd_base, invalid, Error, Result};
use crate::linalg::{det_rational, zmat_mul, QMatrix, ZMatrix};
use crate::numeral::half;
use crate::rational::Rational;

/// Adjacency structure of carry-producing digit transitions.
///
/// `a` is the `h×h` upper-triangular matrix of ones (`h = (b-1)/2`), and
/// `m = [[0, A], [Aᵀ, 0]]` with rows and columns labelled
/// `-h, …, -1, 1, …, h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    pub base: u64,
    pub half: usize,
    pub a: ZMatrix,
    pub m: ZMatrix,
}

impl TransferMatrix {
    pub fn labels(&self) -> Vec<i64> {
        let h = self.half as i64;
        (-h..=-1).chain(1..=h).collect()
    }

    pub fn ata(&self) -> ZMatrix {
        let at: ZMatrix = (0..self.half)
            .map(|i| (0..self.half).map(|j| self.a[j][i].clone()).collect())
            .collect();
        zmat_mul(&at, &self.a)
    }
}

pub fn transfer_matrix(b: u64) -> Result<TransferMatrix> {
    check_odd_base(b)?;
    let h = half(b) as usize;
    let one = |c: bool| if c { BigInt::one() } else { BigInt::zero() };
    let a: ZMatrix = (0..h).map(|i| (0..h).map(|j| one(j >= i)).collect()).collect();
    let m: ZMatrix = (0..2 * h)
        .map(|r| {
            (0..2 * h)
                .map(|c| match (r < h, c < h) {
                    (true, false) => a[r][c - h].clone(),
                    (false, true) => a[c][r - h].clone(),
                    _ => BigInt::zero(),
                })
                .collect()
        })
        .collect();
    let t = TransferMatrix { base: b, half: h, a, m };
    let ata = t.ata();
    for (i, row) in ata.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v != BigInt::from(i.min(j) + 1) {
                return Err(Error::InvariantViolation(format!(
                    "(AᵀA)[{}][{}] = {v}, expected min = {}",
                    i + 1,
                    j + 1,
                    i.min(j) + 1
                )));
            }
        }
    }
    Ok(t)
}

fn mat_vec(m: &ZMatrix, v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Number of length-`i` remainder sequences whose `i-1` gaps all carry.
pub fn run_count(i: usize, b: u64) -> Result<BigInt> {
    check_odd_base(b)?;
    if i == 0 {
        return invalid("i must be >= 1");
    }
    if i == 1 {
        return Ok(BigInt::from(b));
    }
    let t = transfer_matrix(b)?;
    let ata = t.ata();
    // (i-1)/2 for odd i, (i-2)/2 for even i
    let steps = (i - 1) / 2;
    // (AᵀA)^steps · 1
    let mut v = vec![BigInt::one(); t.half];
    for _ in 0..steps {
        v = mat_vec(&ata, &v);
    }
    // 1ᵀA = (1, 2, …, h) for the odd number of gaps
    let total: BigInt = if i % 2 == 1 {
        v.iter().sum()
    } else {
        v.iter().enumerate().map(|(k, x)| x * (k + 1)).sum()
    };
    Ok(total * 2)
}

/// `a_i` from exact path counts: `a_1 = 1`, otherwise `run_count / b^i`.
pub fn a_exact(i: usize, b: u64) -> Result<Rational> {
    if i == 0 {
        return invalid("i must be >= 1");
    }
    check_odd_base(b)?;
    if i == 1 {
        return Ok(Rational::one());
    }
    Ok(Rational::new(run_count(i, b)?, BigInt::from(b).pow(i as u32)))
}

/// Eigen-data of the `min(i,j)` matrix for base `b`, `r = 1..=(b-1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub lambda: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

/// `ψ_r(k) = sin((2r-1) k π / b)`.
pub fn psi(r: usize, k: usize, b: u64) -> f64 {
    ((2 * r - 1) as f64 * k as f64 * std::f64::consts::PI / b as f64).sin()
}

pub fn spectral_data(b: u64) -> Result<SpectralData> {
    check_odd_base(b)?;
    let h = half(b) as usize;
    let pi = std::f64::consts::PI;
    let mut data = SpectralData { lambda: vec![], v: vec![], w: vec![] };
    for r in 1..=h {
        let s = ((2 * r - 1) as f64 * pi / (2.0 * b as f64)).sin();
        data.lambda.push(1.0 / (4.0 * s * s));
        data.v.push((1..=h).map(|j| psi(r, j, b)).sum());
        data.w.push((1..=h).map(|j| j as f64 * psi(r, j, b)).sum());
    }
    Ok(data)
}

/// Trigonometric closed form for `a_i`, `i >= 2`.
pub fn a_closed(i: usize, b: u64) -> Result<f64> {
    if i < 2 {
        return invalid("closed form needs i >= 2");
    }
    let d = spectral_data(b)?;
    let scale = 8.0 / (b as f64).powi(i as i32 + 1);
    let sum: f64 = if i % 2 == 1 {
        let e = ((i - 1) / 2) as i32;
        (0..d.lambda.len()).map(|r| d.lambda[r].powi(e) * d.v[r] * d.v[r]).sum()
    } else {
        let e = ((i - 2) / 2) as i32;
        (0..d.lambda.len()).map(|r| d.lambda[r].powi(e) * d.v[r] * d.w[r]).sum()
    };
    Ok(scale * sum)
}

/// Base together with `a_1..=a_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneDepLaw {
    pub base: u64,
    pub a: Vec<Rational>,
}

impl OneDepLaw {
    pub fn new(base: u64, max_i: usize) -> Result<Self> {
        let a = (1..=max_i.max(1))
            .map(|i| a_exact(i, base))
            .collect::<Result<_>>()?;
        Ok(Self { base, a })
    }

    /// `a_i` with `a_0 = 1` and `a_i = 0` for `i < 0`.
    pub fn get(&self, i: i64) -> Rational {
        match i {
            i if i < 0 => Rational::zero(),
            0 => Rational::one(),
            i => self.a[i as usize - 1].clone(),
        }
    }
}

/// Determinant of `(a_{s_{j+1} - s_i})_{i,j=0..k}` where `s_1 < … < s_k`
/// are the (1-based) zero positions of `t`, `s_0 = 0`, `s_{k+1} = len + 1`.
pub fn determinantal_probability(t: &[bool], a: impl Fn(i64) -> Rational) -> Rational {
    let n = t.len() as i64 + 1;
    let mut s = vec![0i64];
    s.extend(
        t.iter()
            .enumerate()
            .filter(|(_, &one)| !one)
            .map(|(p, _)| p as i64 + 1),
    );
    s.push(n);
    let k1 = s.len() - 1;
    let m: QMatrix = (0..k1)
        .map(|i| (0..k1).map(|j| a(s[j + 1] - s[i])).collect())
        .collect();
    det_rational(&m)
}

/// Exact chance of the 0/1 carry pattern `t` in base `b`.
pub fn string_probability(t: &[bool], b: u64) -> Result<Rational> {
    let law = OneDepLaw::new(b, t.len() + 1)?;
    Ok(determinantal_probability(t, |i| law.get(i)))
}

/// Signed carry between two successive remainders: `+1`, `-1` or `0`.
pub fn carry_between(r_prev: i64, r_next: i64, b: u64) -> i8 {
    let gap = r_prev - r_next;
    let threshold = b.div_ceil(2) as i64;
    if gap >= threshold {
        1
    } else if gap <= -threshold {
        -1
    } else {
        0
    }
}

fn enumerate_patterns(len: usize, b: u64, budget: u64, mut hit: impl FnMut(&[i8]) -> bool) -> Result<Rational> {
    check_odd_base(b)?;
    let total = check_budget(b, len + 1, budget)?;
    let h = half(b);
    let mut count = 0u64;
    let mut carries = vec![0i8; len];
    for_each_tuple(-h, h, len + 1, |rs| {
        for (c, w) in carries.iter_mut().zip(rs.windows(2)) {
            *c = carry_between(w[0], w[1], b);
        }
        if hit(&carries) {
            count += 1;
        }
    });
    Ok(Rational::new(count.into(), total.into()))
}

/// 0/1 pattern probability by enumerating all `b^(len+1)` remainder strings.
pub fn brute_force_string(t: &[bool], b: u64) -> Result<Rational> {
    brute_force_string_within(t, b, enumeration_budget())
}

pub fn brute_force_string_within(t: &[bool], b: u64, budget: u64) -> Result<Rational> {
    enumerate_patterns(t.len(), b, budget, |cs| {
        cs.iter().zip(t).all(|(&c, &one)| (c != 0) == one)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignedCarry {
    Minus,
    Zero,
    Plus,
}

impl SignedCarry {
    pub fn value(self) -> i8 {
        match self {
            SignedCarry::Minus => -1,
            SignedCarry::Zero => 0,
            SignedCarry::Plus => 1,
        }
    }

    pub fn from_value(v: i8) -> Self {
        match v.signum() {
            1 => SignedCarry::Plus,
            -1 => SignedCarry::Minus,
            _ => SignedCarry::Zero,
        }
    }

    pub fn negate(self) -> Self {
        Self::from_value(-self.value())
    }
}

impl fmt::Display for SignedCarry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignedCarry::Minus => "-",
            SignedCarry::Zero => "0",
            SignedCarry::Plus => "+",
        })
    }
}

pub fn format_signed(p: &[SignedCarry]) -> String {
    p.iter().map(ToString::to_string).collect()
}

/// Parses a string over `+`, `-`, `0`.
pub fn parse_signed_pattern(s: &str) -> Result<Vec<SignedCarry>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '+' => Ok(SignedCarry::Plus),
            '-' => Ok(SignedCarry::Minus),
            '0' => Ok(SignedCarry::Zero),
            other => Err(Error::InvalidArgument(format!("bad signed carry {other:?}"))),
        })
        .collect()
}

/// Parses a string over `0`, `1`.
pub fn parse_binary_pattern(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidArgument(format!("bad binary digit {other:?}"))),
        })
        .collect()
}

/// Signed pattern probability by enumeration.
pub fn signed_pattern_probability(p: &[SignedCarry], b: u64) -> Result<Rational> {
    signed_pattern_probability_within(p, b, enumeration_budget())
}

pub fn signed_pattern_probability_within(p: &[SignedCarry], b: u64, budget: u64) -> Result<Rational> {
    enumerate_patterns(p.len(), b, budget, |cs| {
        cs.iter().zip(p).all(|(&c, s)| c == s.value())
    })
}

/// Patterns that can never appear for base `b`.
pub fn forbidden_patterns(b: u64) -> Vec<Vec<SignedCarry>> {
    use SignedCarry::*;
    let mut v = vec![vec![Plus, Plus], vec![Minus, Minus]];
    if b == 3 {
        v.push(vec![Plus, Zero, Plus]);
        v.push(vec![Minus, Zero, Minus]);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_integer::Integer;

    fn z(rows: &[&[i64]]) -> ZMatrix {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    fn fib(k: usize) -> BigInt {
        let (mut a, mut b) = (BigInt::zero(), BigInt::one());
        for _ in 0..k {
            let c = &a + &b;
            a = b;
            b = c;
        }
        a
    }

    #[test]
    fn transfer_matrices() {
        let t7 = transfer_matrix(7).unwrap();
        assert_eq!(t7.a, z(&[&[1, 1, 1], &[0, 1, 1], &[0, 0, 1]]));
        assert_eq!(
            t7.m,
            z(&[
                &[0, 0, 0, 1, 1, 1],
                &[0, 0, 0, 0, 1, 1],
                &[0, 0, 0, 0, 0, 1],
                &[1, 0, 0, 0, 0, 0],
                &[1, 1, 0, 0, 0, 0],
                &[1, 1, 1, 0, 0, 0],
            ])
        );
        assert_eq!(t7.labels(), vec![-3, -2, -1, 1, 2, 3]);
        assert_eq!(transfer_matrix(3).unwrap().m, z(&[&[0, 1], &[1, 0]]));
        assert_eq!(transfer_matrix(5).unwrap().ata(), z(&[&[1, 1], &[1, 2]]));
        assert!(transfer_matrix(6).is_err());
    }

    #[test]
    fn ata_is_min_matrix_up_to_99() {
        for b in (3..=99).step_by(2) {
            transfer_matrix(b).unwrap();
        }
    }

    #[test]
    fn transfer_edges_are_carries() {
        // M[x][y] = 1 exactly when remainder x followed by y carries.
        for b in [3u64, 5, 7, 9] {
            let t = transfer_matrix(b).unwrap();
            let labels = t.labels();
            for (r, &x) in labels.iter().enumerate() {
                for (c, &y) in labels.iter().enumerate() {
                    let e = t.m[r][c] == BigInt::one();
                    assert_eq!(e, carry_between(x, y, b) != 0, "b={b} {x}->{y}");
                }
            }
        }
    }

    #[test]
    fn run_probabilities() {
        assert_eq!(a_exact(1, 5).unwrap(), Rational::one());
        assert_eq!(a_exact(2, 5).unwrap(), ratio(6, 25));
        assert_eq!(a_exact(3, 5).unwrap(), ratio(10, 125));
        for i in 2..=20 {
            let want = Rational::new(fib(i + 2) * 2, BigInt::from(5).pow(i as u32));
            assert_eq!(a_exact(i, 5).unwrap(), want, "i={i}");
            let tern = Rational::new(BigInt::from(2), BigInt::from(3).pow(i as u32));
            assert_eq!(a_exact(i, 3).unwrap(), tern, "i={i}");
        }
        assert_eq!(a_exact(2, 7).unwrap(), ratio(12, 49));
        assert!(a_exact(0, 5).is_err());
    }

    #[test]
    fn run_probabilities_match_enumeration() {
        for b in [3u64, 5, 7] {
            for i in 2..=5 {
                let ones = vec![true; i - 1];
                assert_eq!(a_exact(i, b).unwrap(), brute_force_string(&ones, b).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((a_closed(3, 5).unwrap() - 0.08).abs() < 1e-9 * 0.08);
        assert!((a_closed(2, 3).unwrap() - 2.0 / 9.0).abs() < 1e-9);
        let exact = crate::rational::to_f64(&a_exact(7, 7).unwrap());
        assert!((a_closed(7, 7).unwrap() - exact).abs() < 1e-9 * exact);
        assert!(a_closed(1, 5).is_err());
    }

    #[test]
    fn min_matrix_eigenvectors_are_orthogonal() {
        for b in [5u64, 7, 9, 11] {
            let h = half(b) as usize;
            for r in 1..=h {
                for s in 1..=h {
                    let dot: f64 = (1..=h).map(|k| psi(r, k, b) * psi(s, k, b)).sum();
                    let want = if r == s { b as f64 / 4.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "b={b} r={r} s={s}");
                }
            }
        }
    }

    #[test]
    fn p000_base_five() {
        let t = [false, false, false];
        assert_eq!(string_probability(&t, 5).unwrap(), ratio(59, 125));
        assert_eq!(brute_force_string(&t, 5).unwrap(), ratio(59, 125));
    }

    #[test]
    fn p000_symbolic_expansion() {
        // arbitrary values: the expansion is an identity in a_2, a_3, a_4
        for (a2, a3, a4) in [(ratio(1, 3), ratio(2, 7), ratio(5, 11)), (ratio(-4, 9), ratio(3, 2), ratio(1, 13))] {
            let a = |i: i64| match i {
                i if i < 0 => Rational::zero(),
                0 | 1 => Rational::one(),
                2 => a2.clone(),
                3 => a3.clone(),
                4 => a4.clone(),
                _ => unreachable!(),
            };
            let want = Rational::one() - ratio(3, 1) * &a2 + &a2 * &a2 + ratio(2, 1) * &a3 - &a4;
            assert_eq!(determinantal_probability(&[false, false, false], a), want);
        }
    }

    #[test]
    fn all_ones_is_a_run() {
        for len in 1..6 {
            assert_eq!(string_probability(&vec![true; len], 5).unwrap(), a_exact(len + 1, 5).unwrap());
        }
        assert_eq!(brute_force_string(&[true], 5).unwrap(), ratio(6, 25));
        assert_eq!(brute_force_string(&[true, true], 3).unwrap(), ratio(2, 27));
    }

    #[test]
    fn probabilities_sum_to_one() {
        for b in [3u64, 5, 7] {
            for len in 1..=6usize {
                let total: Rational = (0..1u32 << len)
                    .map(|mask| {
                        let t: Vec<bool> = (0..len).map(|p| mask >> p & 1 == 1).collect();
                        string_probability(&t, b).unwrap()
                    })
                    .sum();
                assert_eq!(total, Rational::one());
            }
        }
    }

    #[test]
    fn stationarity_of_single_carry() {
        for len in 1..=4usize {
            for pos in 0..len {
                let single = enumerate_patterns(len, 5, 1 << 20, |cs| cs[pos] != 0).unwrap();
                assert_eq!(single, ratio(6, 25));
            }
        }
    }

    #[test]
    fn signed_patterns() {
        let p = |s: &str, b: u64| signed_pattern_probability(&parse_signed_pattern(s).unwrap(), b).unwrap();
        for b in [3u64, 5, 7] {
            assert!(p("++", b).is_zero());
            assert!(p("--", b).is_zero());
        }
        assert!(p("+0+", 3).is_zero());
        assert!(p("-0-", 3).is_zero());
        assert!(p("+0+", 5) > Rational::zero());
        assert_eq!(p("+-", 5), ratio(5, 125));
        for s in ["+", "+-", "0+-", "+00-", "-+0"] {
            let neg: String = s.chars().map(|c| match c { '+' => '-', '-' => '+', c => c }).collect();
            for b in [3u64, 5] {
                assert_eq!(p(s, b), p(&neg, b));
            }
        }
        assert!(parse_signed_pattern("+x").is_err());
    }

    #[test]
    fn every_non_forbidden_pattern_occurs_for_base_five() {
        use SignedCarry::*;
        let all = [Minus, Zero, Plus];
        for x in all {
            for y in all {
                for w in all {
                    let pat = [x, y, w];
                    let forbidden = pat.windows(2).any(|v| v[0] == v[1] && v[0] != Zero);
                    let prob = signed_pattern_probability(&pat, 5).unwrap();
                    assert_eq!(prob.is_zero(), forbidden, "{}", format_signed(&pat));
                }
            }
        }
    }

    #[test]
    fn enumeration_denominators() {
        let p = brute_force_string(&[false, true], 5).unwrap();
        assert!(BigInt::from(125).is_multiple_of(p.denom()));
        assert!(matches!(
            brute_force_string_within(&[true; 6], 5, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
