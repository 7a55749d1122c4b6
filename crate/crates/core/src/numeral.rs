//! Balanced base-`b` numerals: digits `0, ±1, …, ±(b-1)/2` for odd `b`.
//!
//! Digits are stored most-significant first, the way numbers are written.
//! Carry traces run the other way: `carries[0]` is the carry into the
//! least-significant column.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{check_odd_base, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BalancedNumeral {
    base: u64,
    digits: Vec<i64>,
}

/// Largest digit magnitude `(b-1)/2`.
pub fn half(b: u64) -> i64 {
    ((b - 1) / 2) as i64
}

fn check_digits(digits: &[i64], b: u64) -> Result<()> {
    let h = half(b);
    match digits.iter().find(|d| d.abs() > h) {
        Some(&digit) => Err(Error::InvalidDigit { digit, base: b, max: h }),
        None => Ok(()),
    }
}

impl BalancedNumeral {
    /// Validates and canonicalizes (leading zeros are dropped).
    pub fn from_digits(base: u64, digits: &[i64]) -> Result<Self> {
        check_odd_base(base)?;
        check_digits(digits, base)?;
        let first = digits.iter().position(|&d| d != 0).unwrap_or(digits.len());
        Ok(Self { base, digits: digits[first..].to_vec() })
    }

    pub fn zero(base: u64) -> Result<Self> {
        Self::from_digits(base, &[])
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Most-significant digit first; empty for zero.
    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at column `k`, counting from the least-significant column 0.
    fn column(&self, k: usize) -> i64 {
        let len = self.digits.len();
        if k < len {
            self.digits[len - 1 - k]
        } else {
            0
        }
    }

    pub fn value(&self) -> BigInt {
        horner(&self.digits, self.base)
    }

    pub fn negate(&self) -> Self {
        Self {
            base: self.base,
            digits: self.digits.iter().map(|d| -d).collect(),
        }
    }

    /// Digits joined with commas, `-` for negative digits (`1,-2,-2`).
    pub fn digit_text(&self) -> String {
        self.digits
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn horner(digits: &[i64], b: u64) -> BigInt {
    digits
        .iter()
        .fold(BigInt::zero(), |acc, &d| acc * b + d)
}

/// Balanced expansion of `m` in base `b`.
pub fn to_balanced(m: &BigInt, b: u64) -> Result<BalancedNumeral> {
    check_odd_base(b)?;
    let h = BigInt::from(half(b));
    let bb = BigInt::from(b);
    let mut rest = m.clone();
    let mut digits = Vec::new();
    while !rest.is_zero() {
        let mut r = rest.mod_floor(&bb);
        if r > h {
            r -= &bb;
        }
        rest = (&rest - &r) / &bb;
        digits.push(i64::try_from(r).expect("digit fits in i64"));
    }
    digits.reverse();
    Ok(BalancedNumeral { base: b, digits })
}

/// Value of a digit string, leading zeros tolerated.
pub fn from_balanced(digits: &[i64], b: u64) -> Result<BigInt> {
    check_odd_base(b)?;
    check_digits(digits, b)?;
    Ok(horner(digits, b))
}

/// Parses the comma-separated digit text format.
pub fn parse_digit_text(text: &str) -> Result<Vec<i64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidArgument(format!("bad digit {t:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryTrace {
    pub base: u64,
    pub operand_count: usize,
    /// `κ₁, κ₂, …`: carry into each processed column, least-significant first.
    pub carries: Vec<i64>,
}

/// Adds `operands` column by column, recording every carry.
///
/// Shorter operands are padded with zeros, and columns continue past the
/// longest operand while a nonzero carry remains. At least one column is
/// always processed, so `carries[0] == 0` is always present.
pub fn add_with_trace(
    operands: &[BalancedNumeral],
    b: u64,
) -> Result<(BalancedNumeral, CarryTrace)> {
    check_odd_base(b)?;
    if operands.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 operands, got {}",
            operands.len()
        )));
    }
    if let Some(x) = operands.iter().find(|x| x.base != b) {
        return Err(Error::BaseMismatch { expected: b, found: x.base });
    }
    let h = half(b);
    let bi = b as i64;
    let width = operands.iter().map(|x| x.digits.len()).max().unwrap_or(0);

    let mut carries = Vec::with_capacity(width + 2);
    let mut low_first = Vec::with_capacity(width + 2);
    let mut carry = 0i64;
    let mut col = 0usize;
    while col < width.max(1) || carry != 0 {
        carries.push(carry);
        let s = carry + operands.iter().map(|x| x.column(col)).sum::<i64>();
        // carry out j satisfies jb - h <= s <= jb + h
        let out = (s + h).div_euclid(bi);
        low_first.push(s - out * bi);
        carry = out;
        col += 1;
    }
    low_first.reverse();
    let sum = BalancedNumeral::from_digits(b, &low_first)?;
    Ok((
        sum,
        CarryTrace { base: b, operand_count: operands.len(), carries },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DigitMode {
    Balanced,
    Classical,
}

/// Pairwise carries table; rows and columns run over the digit set in
/// increasing order (`-h..=h` balanced, `0..b` classical).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryTable {
    pub base: u64,
    pub mode: DigitMode,
    pub labels: Vec<i64>,
    pub table: Vec<Vec<i64>>,
}

impl CarryTable {
    pub fn carry_count(&self) -> usize {
        self.table.iter().flatten().filter(|&&v| v != 0).count()
    }
}

pub fn carry_table(b: u64, mode: DigitMode) -> Result<CarryTable> {
    check_odd_base(b)?;
    let bi = b as i64;
    let h = half(b);
    let labels: Vec<i64> = match mode {
        DigitMode::Balanced => (-h..=h).collect(),
        DigitMode::Classical => (0..bi).collect(),
    };
    let table = labels
        .iter()
        .map(|&x| {
            labels
                .iter()
                .map(|&y| {
                    let s = x + y;
                    match mode {
                        DigitMode::Classical if s >= bi => bi,
                        DigitMode::Balanced if s > h => bi,
                        DigitMode::Balanced if s < -h => -bi,
                        _ => 0,
                    }
                })
                .collect()
        })
        .collect();
    Ok(CarryTable { base: b, mode, labels, table })
}

/// Sign of the represented integer, read off the leading digit.
pub fn leading_sign(x: &BalancedNumeral) -> i32 {
    x.digits.first().map_or(0, |d| d.signum() as i32)
}

/// Recomputes a sum column by column with big integers, independent of
/// the `i64` fast path; used to double-check traces.
pub fn recompute_trace(operands: &[BalancedNumeral], trace: &CarryTrace) -> bool {
    let b = BigInt::from(trace.base);
    let h = BigInt::from(half(trace.base));
    let mut carry = BigInt::zero();
    for (col, &k) in trace.carries.iter().enumerate() {
        if carry != BigInt::from(k) {
            return false;
        }
        let s: BigInt = operands.iter().map(|x| BigInt::from(x.column(col))).sum::<BigInt>() + &carry;
        carry = (&s + &h).div_floor(&b);
    }
    carry.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn num(b: u64, d: &[i64]) -> BalancedNumeral {
        BalancedNumeral::from_digits(b, d).unwrap()
    }

    #[test]
    fn converts_the_worked_examples() {
        assert_eq!(to_balanced(&13.into(), 5).unwrap().digits(), &[1, -2, -2]);
        assert_eq!(to_balanced(&(-9).into(), 5).unwrap().digits(), &[-2, 1]);
        assert!(to_balanced(&0.into(), 7).unwrap().digits().is_empty());
    }

    #[test]
    fn rejects_bad_bases() {
        for b in [0, 1, 2, 4, 10] {
            assert_eq!(to_balanced(&5.into(), b), Err(Error::InvalidBase(b)));
        }
    }

    #[test]
    fn evaluates_digit_strings() {
        assert_eq!(from_balanced(&[1, -2, -2], 5).unwrap(), 13.into());
        assert_eq!(from_balanced(&[0, 0, 1], 5).unwrap(), 1.into());
        assert_eq!(from_balanced(&[2, -1], 7).unwrap(), 13.into());
        assert_eq!(to_balanced(&13.into(), 7).unwrap().digits(), &[2, -1]);
        assert!(matches!(
            from_balanced(&[3, 0], 5),
            Err(Error::InvalidDigit { digit: 3, .. })
        ));
    }

    #[test]
    fn negation_flips_digits() {
        let x = num(5, &[1, -2, -2]);
        assert_eq!(x.negate().digits(), &[-1, 2, 2]);
        assert_eq!(x.negate().value(), (-13).into());
        assert!(num(5, &[]).negate().is_zero());
        let y = num(5, &[-2, 1]);
        assert_eq!(y.negate().digits(), &[2, -1]);
        assert_eq!(y.negate().value(), 9.into());
    }

    #[test]
    fn reproduces_the_displayed_addition() {
        let x = num(5, &[1, -2, 1, 2, 2, -1, 0]);
        let y = num(5, &[1, -1, -1, 2, 2, 2, 1]);
        let (sum, trace) = add_with_trace(&[x.clone(), y.clone()], 5).unwrap();
        assert_eq!(sum.digits(), &[1, 2, 1, 0, -1, 1, 1]);
        assert_eq!(trace.carries, vec![0, 0, 0, 1, 1, 0, -1]);
        assert_eq!(sum.value(), x.value() + y.value());
        assert!(recompute_trace(&[x, y], &trace));
    }

    #[test]
    fn adding_zeros() {
        let z = num(5, &[]);
        let (sum, trace) = add_with_trace(&[z.clone(), z], 5).unwrap();
        assert!(sum.is_zero());
        assert!(trace.carries.iter().all(|&k| k == 0));
        assert_eq!(trace.carries.first(), Some(&0));
    }

    #[test]
    fn adding_mixed_signs_base_seven() {
        let ops = [to_balanced(&13.into(), 7).unwrap(), to_balanced(&(-9).into(), 7).unwrap()];
        let (sum, trace) = add_with_trace(&ops, 7).unwrap();
        assert_eq!(sum.value(), 4.into());
        assert_eq!(sum, to_balanced(&4.into(), 7).unwrap());
        assert!(recompute_trace(&ops, &trace));
    }

    #[test]
    fn carry_out_of_the_top_column() {
        // 2 + 2 in base 5 = 1,-1 needs a column beyond both operands.
        let (sum, trace) = add_with_trace(&[num(5, &[2]), num(5, &[2])], 5).unwrap();
        assert_eq!(sum.digits(), &[1, -1]);
        assert_eq!(trace.carries, vec![0, 1]);
    }

    #[test]
    fn add_errors() {
        assert!(matches!(
            add_with_trace(&[num(5, &[1]), num(7, &[1])], 5),
            Err(Error::BaseMismatch { expected: 5, found: 7 })
        ));
        assert!(add_with_trace(&[num(5, &[1])], 5).is_err());
    }

    #[test]
    fn carry_tables_for_base_five() {
        let t = carry_table(5, DigitMode::Balanced).unwrap();
        let expect = vec![
            vec![-5, -5, 0, 0, 0],
            vec![-5, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 5],
            vec![0, 0, 0, 5, 5],
        ];
        assert_eq!(t.table, expect);
        assert_eq!(t.carry_count(), 6);
        assert_eq!(carry_table(5, DigitMode::Classical).unwrap().carry_count(), 10);
        assert_eq!(carry_table(9, DigitMode::Balanced).unwrap().carry_count(), 20);
    }

    #[test]
    fn carry_counts_up_to_99() {
        for b in (3..=99u64).step_by(2) {
            let bal = carry_table(b, DigitMode::Balanced).unwrap().carry_count() as u64;
            let cls = carry_table(b, DigitMode::Classical).unwrap().carry_count() as u64;
            assert_eq!(bal, (b * b - 1) / 4, "b={b}");
            assert_eq!(cls, b * (b - 1) / 2, "b={b}");
        }
    }

    #[test]
    fn digit_text_parsing() {
        assert_eq!(parse_digit_text("1,-2,-2").unwrap(), vec![1, -2, -2]);
        assert_eq!(parse_digit_text("").unwrap(), Vec::<i64>::new());
        assert!(parse_digit_text("1,,2").is_err());
        assert_eq!(num(5, &[1, -2, -2]).digit_text(), "1,-2,-2");
    }

    fn odd_base() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![3u64, 5, 7, 9, 11])
    }

    proptest! {
        #[test]
        fn round_trip(m in -1_000_000i64..=1_000_000, b in odd_base()) {
            let x = to_balanced(&m.into(), b).unwrap();
            prop_assert_eq!(from_balanced(x.digits(), b).unwrap(), BigInt::from(m));
            prop_assert_ne!(x.digits().first(), Some(&0));
            if m != 0 {
                prop_assert_eq!(leading_sign(&x), m.signum() as i32);
            }
            prop_assert_eq!(to_balanced(&(-m).into(), b).unwrap(), x.negate());
        }

        #[test]
        fn addition_is_correct(
            b in odd_base(),
            vals in prop::collection::vec(-100_000i64..100_000, 2..9),
        ) {
            let ops: Vec<_> = vals.iter().map(|&v| to_balanced(&v.into(), b).unwrap()).collect();
            let (sum, trace) = add_with_trace(&ops, b).unwrap();
            prop_assert_eq!(sum.value(), BigInt::from(vals.iter().sum::<i64>()));
            prop_assert_eq!(trace.carries[0], 0);
            let bound = (ops.len() / 2) as i64;
            prop_assert!(trace.carries.iter().all(|k| k.abs() <= bound));
            prop_assert!(recompute_trace(&ops, &trace));
        }
    }
}
