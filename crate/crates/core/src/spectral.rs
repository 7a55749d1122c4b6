//! Closed-form spectrum of the balanced carries chain for even `n`.
//!
//! The eigenvalues are `1, 1/b, …, 1/b^n`; the left eigenvectors `v_j`
//! (hyperoctahedral Foulkes characters) and right eigenvectors `u_j`
//! (hyperoctahedral Eulerian idempotents) are integer valued and do not
//! depend on `b`. Everything here is exact.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::chain::{matrix_power, transition_matrix, CarriesMatrix};
use crate::error::{check_odd_base, invalid, Error, Result};
use crate::linalg::{zmat_mul, ZMatrix};
use crate::poly;
use crate::rational::{abs, Rational};

fn check_even(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        invalid(format!("n must be even and >= 2, got {n}"))
    } else {
        Ok(())
    }
}

fn check_index(what: &str, v: usize, n: usize) -> Result<()> {
    if v > n {
        invalid(format!("{what} = {v} out of range 0..={n}"))
    } else {
        Ok(())
    }
}

/// `2^n n!`, the order of the hyperoctahedral group.
pub fn signed_perm_count(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k) << n
}

/// `Σ_{r=0}^{top} (-1)^r C(n+1,r) (base - 2r)^e`, the shape shared by the
/// signed Eulerian numbers, the Foulkes table and the left eigenvectors.
fn alternating_power_sum(n: usize, top: i64, base: i64, e: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for r in 0..=top {
        let term = binomial(BigInt::from(n + 1), BigInt::from(r))
            * BigInt::from(base - 2 * r).pow(e as u32);
        if r % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `Ā(n,k) = Σ_{r=0}^{k} (-1)^r C(n+1,r) (2k-2r+1)^n`.
pub fn signed_eulerian(n: usize, k: usize) -> Result<BigInt> {
    check_index("k", k, n)?;
    Ok(alternating_power_sum(n, k as i64, 2 * k as i64 + 1, n))
}

/// Descent distribution over all `2^n n!` signed permutations by direct
/// enumeration; entry `k` counts permutations with `k` descents.
///
/// Values are compared in the order `1 < 2 < … < n < -n < … < -1`, and
/// position `n` is a descent iff the last value is negative.
pub fn signed_descent_distribution(n: usize) -> Vec<u64> {
    let rank = |v: i64| if v > 0 { v } else { 2 * n as i64 + 1 + v };
    let mut counts = vec![0u64; n + 1];
    let mut perm: Vec<i64> = (1..=n as i64).collect();
    loop {
        for mask in 0u32..(1 << n) {
            let signed: Vec<i64> = perm
                .iter()
                .enumerate()
                .map(|(p, &v)| if mask >> p & 1 == 1 { -v } else { v })
                .collect();
            let mut d = signed.windows(2).filter(|w| rank(w[0]) > rank(w[1])).count();
            if signed.last().is_some_and(|&v| v < 0) {
                d += 1;
            }
            counts[d] += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    counts
}

fn next_permutation(p: &mut [i64]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `v_j^n[i] = Σ_{r=0}^{i+n/2} (-1)^r C(n+1,r) (n+2i-2r+1)^(n-j)` for
/// states `i = -n/2..=n/2`.
pub fn left_eigenvector(n: usize, j: usize) -> Result<Vec<BigInt>> {
    check_even(n)?;
    check_index("j", j, n)?;
    let half = (n / 2) as i64;
    Ok((-half..=half)
        .map(|i| alternating_power_sum(n, i + half, n as i64 + 2 * i + 1, n - j))
        .collect())
}

/// Coefficient of `x^(n-j)` in `(x-n-2i+1)(x-n-2i+3)⋯(x-n-2i+2n-1)`.
pub fn right_eigenvector(n: usize, j: usize) -> Result<Vec<BigInt>> {
    check_even(n)?;
    check_index("j", j, n)?;
    let half = (n / 2) as i64;
    Ok((-half..=half)
        .map(|i| poly::coeff(&right_polynomial(n, i), (n - j) as i64))
        .collect())
}

fn right_polynomial(n: usize, i: i64) -> poly::IntPoly {
    let n = n as i64;
    poly::linear_product((1..=n).map(|m| BigInt::from(-n - 2 * i + 2 * m - 1)))
}

/// Left eigenvectors as the rows of `v`, right eigenvectors as the
/// columns of `u`; row/column `j` belongs to eigenvalue `1/b^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralTables {
    pub n: usize,
    pub v: ZMatrix,
    pub u: ZMatrix,
}

impl SpectralTables {
    pub fn new(n: usize) -> Result<Self> {
        check_even(n)?;
        let v = (0..=n)
            .map(|j| left_eigenvector(n, j))
            .collect::<Result<ZMatrix>>()?;
        let cols = (0..=n)
            .map(|j| right_eigenvector(n, j))
            .collect::<Result<ZMatrix>>()?;
        let u = (0..=n)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        Ok(Self { n, v, u })
    }

    pub fn product_uv(&self) -> ZMatrix {
        zmat_mul(&self.u, &self.v)
    }
}

/// `w^n_j[i]` for `0 <= i, j <= n`, stored as `w[j][i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoulkesTable {
    pub n: usize,
    pub w: ZMatrix,
}

/// `w^n_j[i] = Σ_{r=0}^{i} (-1)^r C(n+1,r) (2i-2r+1)^(n-j)`.
pub fn foulkes_direct(n: usize) -> FoulkesTable {
    let w = (0..=n)
        .map(|j| {
            (0..=n as i64)
                .map(|i| alternating_power_sum(n, i, 2 * i + 1, n - j))
                .collect()
        })
        .collect();
    FoulkesTable { n, w }
}

/// Builds the table from `n = 0` upward with
/// `w^n_j[i] = w^{n-1}_{j-1}[i] - w^{n-1}_{j-1}[i-1]`, taking row `j = 0`
/// from the signed Eulerian numbers and column `i = n` as `(-1)^j`.
pub fn foulkes_recurrence(n: usize) -> FoulkesTable {
    let mut prev: ZMatrix = vec![vec![BigInt::one()]];
    for m in 1..=n {
        let mut w = vec![vec![BigInt::zero(); m + 1]; m + 1];
        for (i, cell) in w[0].iter_mut().enumerate() {
            *cell = signed_eulerian(m, i).expect("i <= m");
        }
        for j in 1..=m {
            for i in 0..m {
                let left = if i == 0 { BigInt::zero() } else { prev[j - 1][i - 1].clone() };
                w[j][i] = &prev[j - 1][i] - left;
            }
            w[j][m] = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        }
        prev = w;
    }
    FoulkesTable { n, w: prev }
}

/// Direct table, cross-checked against the recurrence.
pub fn foulkes_table(n: usize) -> Result<FoulkesTable> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let direct = foulkes_direct(n);
    let rec = foulkes_recurrence(n);
    for j in 0..=n {
        for i in 0..=n {
            if direct.w[j][i] != rec.w[j][i] {
                return Err(Error::InvariantViolation(format!(
                    "Foulkes table mismatch at j={j}, i={i}: direct {} vs recurrence {}",
                    direct.w[j][i], rec.w[j][i]
                )));
            }
        }
    }
    Ok(direct)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationaryDist {
    pub n: usize,
    /// Entry `t` is the chance of carry `t - n/2`.
    pub probabilities: Vec<Rational>,
}

/// `π(j - n/2) = Ā(n,j) / (2^n n!)`.
pub fn stationary(n: usize) -> Result<StationaryDist> {
    check_even(n)?;
    let total = signed_perm_count(n);
    let probabilities = (0..=n)
        .map(|j| Ok(Rational::new(signed_eulerian(n, j)?, total.clone())))
        .collect::<Result<_>>()?;
    Ok(StationaryDist { n, probabilities })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// Eigen-index `j` (or column index for the `U·V` check).
    pub j: usize,
    pub state: i64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub first_failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub base: String,
    pub checks: Vec<IdentityCheck>,
}

impl SpectrumReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &Failure)> {
        self.checks
            .iter()
            .find_map(|c| c.first_failure.as_ref().map(|f| (c.name, f)))
    }
}

fn check(name: &'static str, failure: Option<Failure>) -> IdentityCheck {
    IdentityCheck { name, passed: failure.is_none(), first_failure: failure }
}

fn int(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

/// Checks every eigen-identity for the chain `K_b`.
pub fn verify_spectrum(n: usize, b: u64) -> Result<SpectrumReport> {
    check_even(n)?;
    check_odd_base(b)?;
    let k = transition_matrix(n, b)?;
    let tables = SpectralTables::new(n)?;
    let pi = stationary(n)?;
    Ok(verify_tables(&k, &tables, &pi))
}

/// Checks the supplied tables against `k`, taking the eigenvalue base from
/// `k.base()` (so powers `K^r = K_{b^r}` work too):
///
/// * `left`: `v_j K = v_j / b^j`
/// * `right`: `K u_j = u_j / b^j`
/// * `inverse`: `U V = 2^n n! I`
/// * `stationary`: `π K = π` and `2^n n! π = v_0`
pub fn verify_tables(k: &CarriesMatrix, tables: &SpectralTables, pi: &StationaryDist) -> SpectrumReport {
    let n = tables.n;
    let states: Vec<i64> = k.states().collect();
    let dim = states.len();
    let base = BigInt::from(k.base().clone());
    let lambda = |j: usize| Rational::new(BigInt::one(), base.clone().pow(j as u32));

    let left = (0..=n).find_map(|j| {
        let lj = lambda(j);
        (0..dim).find_map(|c| {
            let lhs = (0..dim).fold(Rational::zero(), |acc, r| {
                acc + int(&tables.v[j][r]) * &k.entries()[r][c]
            });
            let rhs = int(&tables.v[j][c]) * &lj;
            (lhs != rhs).then(|| Failure {
                j,
                state: states[c],
                detail: format!("(vK)[{}] = {lhs}, expected {rhs}", states[c]),
            })
        })
    });

    let right = (0..=n).find_map(|j| {
        let lj = lambda(j);
        (0..dim).find_map(|r| {
            let lhs = (0..dim).fold(Rational::zero(), |acc, c| {
                acc + &k.entries()[r][c] * int(&tables.u[c][j])
            });
            let rhs = int(&tables.u[r][j]) * &lj;
            (lhs != rhs).then(|| Failure {
                j,
                state: states[r],
                detail: format!("(Ku)[{}] = {lhs}, expected {rhs}", states[r]),
            })
        })
    });

    let scale = signed_perm_count(n);
    let uv = tables.product_uv();
    let inverse = (0..dim).find_map(|r| {
        (0..dim).find_map(|c| {
            let want = if r == c { scale.clone() } else { BigInt::zero() };
            (uv[r][c] != want).then(|| Failure {
                j: c,
                state: states[r],
                detail: format!("(UV)[{r}][{c}] = {}, expected {want}", uv[r][c]),
            })
        })
    });

    let p = &pi.probabilities;
    let stationary = (0..dim)
        .find_map(|c| {
            let lhs = (0..dim).fold(Rational::zero(), |acc, r| acc + &p[r] * &k.entries()[r][c]);
            (lhs != p[c]).then(|| Failure {
                j: 0,
                state: states[c],
                detail: format!("(πK)[{}] = {lhs}, expected {}", states[c], p[c]),
            })
        })
        .or_else(|| {
            (0..dim).find_map(|c| {
                let scaled = &p[c] * int(&scale);
                (scaled != int(&tables.v[0][c])).then(|| Failure {
                    j: 0,
                    state: states[c],
                    detail: format!("2^n n! π = {scaled}, v_0 = {}", tables.v[0][c]),
                })
            })
        });

    SpectrumReport {
        n,
        base: BigUint::to_string(k.base()),
        checks: vec![
            check("left", left),
            check("right", right),
            check("inverse", inverse),
            check("stationary", stationary),
        ],
    }
}

fn check_state(n: usize, m: i64) -> Result<()> {
    let half = (n / 2) as i64;
    if m.abs() > half {
        invalid(format!("state {m} outside -{half}..={half}"))
    } else {
        Ok(())
    }
}

/// `E(κ_t | κ_0 = m) = Σ_j j K^t(m, j)`, exactly.
pub fn conditional_expectation(n: usize, b: u64, m: i64, t: u32) -> Result<Rational> {
    check_even(n)?;
    check_state(n, m)?;
    let kt = matrix_power(&transition_matrix(n, b)?, t);
    Ok(kt
        .states()
        .zip(kt.row(m))
        .fold(Rational::zero(), |acc, (j, p)| acc + p * Rational::from_integer(j.into())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergence {
    /// `|K^r(0, j - n/2) - π(j - n/2)|`, indexed by `j`.
    pub deviations: Vec<Rational>,
    pub max: Rational,
}

/// Distance of row 0 of `K^r` from the stationary law, state by state.
pub fn convergence_check(n: usize, b: u64, r: u32) -> Result<Convergence> {
    if r == 0 {
        return invalid("r must be >= 1");
    }
    let pi = stationary(n)?;
    let kr = matrix_power(&transition_matrix(n, b)?, r);
    let deviations: Vec<Rational> = kr
        .row(0)
        .iter()
        .zip(&pi.probabilities)
        .map(|(a, p)| abs(&(a - p)))
        .collect();
    let max = deviations.iter().max().cloned().unwrap_or_else(Rational::zero);
    Ok(Convergence { deviations, max })
}

/// Coefficients `c_0..c_n` of
/// `P(x) = (x-n-2s+1)(x-n-2s+3)⋯(x-n-2s+2n-1) / (2^n n!)` in the basis
/// `(x-n)^k`, where `s = i - n/2` is the carry state of descent count `i`.
pub fn eulerian_idempotent_coeffs(n: usize, i: usize) -> Result<Vec<Rational>> {
    check_even(n)?;
    check_index("i", i, n)?;
    let s = i as i64 - (n / 2) as i64;
    let nn = n as i64;
    // substituting x = y + n leaves factors (y - 2s + 2m - 1)
    let p = poly::linear_product((1..=nn).map(|m| BigInt::from(-2 * s + 2 * m - 1)));
    let scale = signed_perm_count(n);
    Ok(p.into_iter().map(|c| Rational::new(c, scale.clone())).collect())
}

/// Re-expands `Σ_k c_k (x-n)^k` in the monomial basis; entry `m` is `[x^m]`.
pub fn shifted_to_monomial(coeffs: &[Rational], n: usize) -> Vec<Rational> {
    let shift = BigInt::from(-(n as i64));
    (0..coeffs.len())
        .map(|m| {
            coeffs
                .iter()
                .enumerate()
                .skip(m)
                .fold(Rational::zero(), |acc, (k, c)| {
                    let w = binomial(BigInt::from(k), BigInt::from(m)) * shift.clone().pow((k - m) as u32);
                    acc + c * Rational::from_integer(w)
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn signed_eulerian_rows() {
        let row = |n: usize| (0..=n).map(|k| signed_eulerian(n, k).unwrap()).collect::<Vec<_>>();
        assert_eq!(row(4), ints(&[1, 76, 230, 76, 1]));
        assert_eq!(row(1), ints(&[1, 1]));
        assert_eq!(row(3), ints(&[1, 23, 23, 1]));
        assert!(signed_eulerian(3, 4).is_err());
    }

    #[test]
    fn descent_enumeration() {
        assert_eq!(signed_descent_distribution(1), vec![1, 1]);
        assert_eq!(signed_descent_distribution(3), vec![1, 23, 23, 1]);
        // -1 -2 -3 has three descents; only it and a few others reach 3
        assert_eq!(signed_descent_distribution(3).iter().sum::<u64>(), 48);
    }

    #[test]
    fn type_b_eulerian_recurrence_up_to_eight() {
        // B(n,k) = (2k+1) B(n-1,k) + (2n-2k+1) B(n-1,k-1)
        let mut prev = vec![BigInt::one()];
        for n in 1..=8usize {
            let cur: Vec<BigInt> = (0..=n)
                .map(|k| {
                    let stay = prev.get(k).cloned().unwrap_or_default() * (2 * k + 1);
                    let up = if k == 0 { BigInt::zero() } else { prev[k - 1].clone() * (2 * n - 2 * k + 1) };
                    stay + up
                })
                .collect();
            for (k, c) in cur.iter().enumerate() {
                assert_eq!(&signed_eulerian(n, k).unwrap(), c, "n={n} k={k}");
            }
            assert_eq!(cur.iter().sum::<BigInt>(), signed_perm_count(n));
            prev = cur;
        }
    }

    #[test]
    fn eigenvector_examples() {
        assert_eq!(left_eigenvector(2, 1).unwrap(), ints(&[1, 0, -1]));
        assert_eq!(left_eigenvector(4, 2).unwrap(), ints(&[1, 4, -10, 4, 1]));
        assert_eq!(left_eigenvector(2, 0).unwrap(), ints(&[1, 6, 1]));
        assert_eq!(right_eigenvector(2, 1).unwrap(), ints(&[4, 0, -4]));
        assert_eq!(right_eigenvector(4, 4).unwrap(), ints(&[105, -15, 9, -15, 105]));
        assert_eq!(right_eigenvector(4, 0).unwrap(), ints(&[1, 1, 1, 1, 1]));
        assert!(left_eigenvector(3, 0).is_err());
        assert!(right_eigenvector(4, 5).is_err());
    }

    #[test]
    fn left_boundary_is_alternating_sign() {
        for n in (2..=10).step_by(2) {
            for j in 0..=n {
                let v = left_eigenvector(n, j).unwrap();
                let want = if j % 2 == 0 { 1 } else { -1 };
                assert_eq!(v[n], BigInt::from(want));
            }
        }
    }

    #[test]
    fn foulkes_examples() {
        let t = foulkes_table(4).unwrap();
        assert_eq!(t.w[1][1], BigInt::from(22));
        for n in 1..=8 {
            let t = foulkes_table(n).unwrap();
            for j in 0..=n {
                assert_eq!(t.w[j][n], BigInt::from(if j % 2 == 0 { 1 } else { -1 }));
            }
        }
        let t2 = foulkes_table(2).unwrap();
        for j in 0..=2 {
            assert_eq!(t2.w[j], left_eigenvector(2, j).unwrap());
        }
        assert!(foulkes_table(0).is_err());
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary(2).unwrap().probabilities, vec![ratio(1, 8), ratio(3, 4), ratio(1, 8)]);
        let p4 = stationary(4).unwrap().probabilities;
        let want: Vec<_> = [1, 76, 230, 76, 1].iter().map(|&a| ratio(a, 384)).collect();
        assert_eq!(p4, want);
        for n in (2..=12).step_by(2) {
            let s: Rational = stationary(n).unwrap().probabilities.iter().sum();
            assert_eq!(s, Rational::one());
        }
        assert!(stationary(3).is_err());
    }

    #[test]
    fn spectrum_verifies() {
        assert!(verify_spectrum(2, 5).unwrap().passed());
        assert!(verify_spectrum(4, 3).unwrap().passed());
        assert!(verify_spectrum(3, 3).is_err());
    }

    #[test]
    fn perturbed_tables_are_caught() {
        let k = transition_matrix(2, 5).unwrap();
        let mut tables = SpectralTables::new(2).unwrap();
        tables.v[1][2] += 1;
        let report = verify_tables(&k, &tables, &stationary(2).unwrap());
        assert!(!report.passed());
        let (name, f) = report.first_failure().unwrap();
        assert_eq!(name, "left");
        assert_eq!(f.j, 1);
        assert!(report.checks[1].passed);
    }

    #[test]
    fn conditional_expectation_examples() {
        assert_eq!(conditional_expectation(2, 5, 1, 1).unwrap(), ratio(1, 5));
        assert_eq!(conditional_expectation(2, 5, 0, 3).unwrap(), ratio(0, 1));
        assert_eq!(conditional_expectation(4, 3, -2, 2).unwrap(), ratio(-2, 9));
        assert!(conditional_expectation(2, 5, 2, 1).is_err());
    }

    #[test]
    fn convergence_examples() {
        let c3 = convergence_check(2, 3, 3).unwrap();
        assert_eq!(c3.deviations[0], ratio(1, 5832));
        assert_eq!(c3.deviations[2], ratio(1, 5832));
        assert_eq!(c3.max, ratio(1, 2916));
        let c1 = convergence_check(2, 3, 1).unwrap();
        let c5 = convergence_check(2, 3, 5).unwrap();
        assert!(c1.max > c5.max);
        let c10 = convergence_check(2, 3, 10).unwrap();
        assert!(c10.max < ratio(1, 1_000_000));
        assert!(convergence_check(2, 3, 0).is_err());
    }

    #[test]
    fn idempotent_coefficients() {
        // state 0: (x-1)(x+1)/8 = ((x-2)^2 + 4(x-2) + 3)/8
        assert_eq!(
            eulerian_idempotent_coeffs(2, 1).unwrap(),
            vec![ratio(3, 8), ratio(1, 2), ratio(1, 8)]
        );
        for n in [2usize, 4, 6] {
            let scale = Rational::from_integer(signed_perm_count(n));
            for i in 0..=n {
                let c = eulerian_idempotent_coeffs(n, i).unwrap();
                assert_eq!(c[n], Rational::one() / &scale);
                let mono = shifted_to_monomial(&c, n);
                for j in 0..=n {
                    let u = right_eigenvector(n, j).unwrap();
                    assert_eq!(&mono[n - j] * &scale, Rational::from_integer(u[i].clone()));
                }
            }
        }
    }
}
