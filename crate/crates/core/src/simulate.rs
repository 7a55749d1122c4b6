//! Seeded Monte Carlo runs of both carries processes, compared against the
//! exact values from [`crate::chain`], [`crate::spectral`] and
//! [`crate::pointprocess`].
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Trials are split into fixed-size shards; shard
//! `s` uses stream `s` of that generator, so results do not depend on the
//! number of worker threads. Digits are drawn with `rand`'s `Uniform`
//! integer sampler (widening multiply with rejection, unbiased).

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chain::{offset_for, transition_matrix};
use crate::error::{check_odd_base, invalid, Error, Result};
use crate::numeral::{add_with_trace, half, BalancedNumeral};
use crate::pointprocess::{a_exact, format_signed, signed_pattern_probability, SignedCarry};
use crate::rational::{to_f64, to_pq, Rational};
use crate::spectral::stationary;

const CHAIN_SHARD: u64 = 64;
const COLUMN_SHARD: u64 = 16;
/// Longest run `a_i` estimated from a column.
pub const MAX_RUN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub base: u64,
    /// Operand count; unused by column runs.
    pub n: usize,
    /// Digits per operand (chain) or column height (column).
    pub length: usize,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn chain(base: u64, n: usize, digits: usize, trials: u64, seed: u64) -> Self {
        Self { base, n, length: digits, trials, seed }
    }

    pub fn column(base: u64, height: usize, trials: u64, seed: u64) -> Self {
        Self { base, n: 1, length: height, trials, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_odd_base(self.base)?;
        if self.n == 0 || self.length == 0 || self.trials == 0 {
            return invalid("n, length and trials must all be positive");
        }
        Ok(())
    }
}

fn ser_pq<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_pq(r))
}

fn ser_opt_pq<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&to_pq(r)),
        None => s.serialize_none(),
    }
}

/// One empirical frequency `hits / samples` next to its exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub label: String,
    pub hits: u64,
    pub samples: u64,
    #[serde(serialize_with = "ser_pq")]
    pub empirical: Rational,
    #[serde(serialize_with = "ser_opt_pq")]
    pub exact: Option<Rational>,
    /// Binomial standard error `sqrt(p(1-p)/samples)` at the exact `p`.
    pub sigma: Option<f64>,
    pub deviation: Option<f64>,
    pub within_3sigma: Option<bool>,
}

impl Estimate {
    fn new(label: String, hits: u64, samples: u64, exact: Option<Rational>) -> Self {
        let empirical = Rational::new(hits.into(), samples.max(1).into());
        let (sigma, deviation, within) = match &exact {
            Some(p) => {
                let pf = to_f64(p);
                let sigma = (pf * (1.0 - pf) / samples as f64).sqrt();
                let dev = to_f64(&empirical) - pf;
                // an impossible event must never be observed
                let ok = if sigma == 0.0 { dev == 0.0 } else { dev.abs() <= 3.0 * sigma };
                (Some(sigma), Some(dev), Some(ok))
            }
            None => (None, None, None),
        };
        Self { label, hits, samples, empirical, exact, sigma, deviation, within_3sigma: within }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub kind: &'static str,
    pub config: SimConfig,
    /// Transition frequencies (chain), or run and signed-pattern
    /// frequencies (column).
    pub estimates: Vec<Estimate>,
    /// Carry-state occupancy; chain runs only.
    pub occupancy: Vec<Estimate>,
    /// `(digit, count)` over every generated digit.
    pub digit_counts: Vec<(i64, u64)>,
    pub digits_uniform: bool,
    /// Forbidden signed patterns and how often each was seen (always 0).
    pub forbidden_observed: Vec<(String, u64)>,
    pub max_abs_deviation: f64,
    /// Pearson statistic summed over all compared multinomial cells.
    pub chi_square: f64,
}

impl SimReport {
    pub fn all_within_3sigma(&self) -> bool {
        self.estimates.iter().all(|e| e.within_3sigma != Some(false))
    }
}

fn digit_sampler(b: u64) -> Uniform<i64> {
    let h = half(b);
    Uniform::new_inclusive(-h, h).expect("non-empty digit range")
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shards(trials: u64, size: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(size))
        .map(|s| (s, size.min(trials - s * size)))
        .collect()
}

fn digits_uniform(counts: &[u64], b: u64) -> bool {
    let total: u64 = counts.iter().sum();
    let p = 1.0 / b as f64;
    let mean = total as f64 * p;
    let sd = (total as f64 * p * (1.0 - p)).sqrt();
    counts.iter().all(|&c| (c as f64 - mean).abs() <= 5.0 * sd)
}

fn label_digits(counts: Vec<u64>, b: u64) -> Vec<(i64, u64)> {
    let h = half(b);
    (-h..=h).zip(counts).collect()
}

fn add_counts(acc: &mut [u64], other: &[u64]) {
    for (a, o) in acc.iter_mut().zip(other) {
        *a += o;
    }
}

#[derive(Clone)]
struct ChainTally {
    transitions: Vec<Vec<u64>>,
    occupancy: Vec<u64>,
    digits: Vec<u64>,
}

impl ChainTally {
    fn new(dim: usize, b: u64) -> Self {
        Self {
            transitions: vec![vec![0; dim]; dim],
            occupancy: vec![0; dim],
            digits: vec![0; b as usize],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, o) in self.transitions.iter_mut().zip(&other.transitions) {
            add_counts(a, o);
        }
        add_counts(&mut self.occupancy, &other.occupancy);
        add_counts(&mut self.digits, &other.digits);
        self
    }
}

/// Adds `n` random `length`-digit numerals per trial and tallies the
/// carries `κ_t → κ_{t+1}` over the random columns.
pub fn simulate_chain(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    if cfg.n < 2 {
        return invalid("chain simulation needs n >= 2 operands");
    }
    let b = cfg.base;
    let h = half(b);
    let k = transition_matrix(cfg.n, b)?;
    let offset = offset_for(cfg.n);
    let dim = k.dim();
    let sampler = digit_sampler(b);

    let tally = shards(cfg.trials, CHAIN_SHARD)
        .into_par_iter()
        .map(|(shard, count)| -> Result<ChainTally> {
            let mut rng = shard_rng(cfg.seed, shard);
            let mut t = ChainTally::new(dim, b);
            let mut digits = vec![0i64; cfg.length];
            for _ in 0..count {
                let mut ops = Vec::with_capacity(cfg.n);
                for _ in 0..cfg.n {
                    for d in digits.iter_mut() {
                        *d = sampler.sample(&mut rng);
                        t.digits[(*d + h) as usize] += 1;
                    }
                    ops.push(BalancedNumeral::from_digits(b, &digits)?);
                }
                let (_, trace) = add_with_trace(&ops, b)?;
                let carry = |c: usize| trace.carries.get(c).copied().unwrap_or(0);
                for col in 0..cfg.length {
                    let (from, to) = (carry(col) + offset, carry(col + 1) + offset);
                    t.transitions[from as usize][to as usize] += 1;
                    t.occupancy[to as usize] += 1;
                }
            }
            Ok(t)
        })
        .try_reduce(|| ChainTally::new(dim, b), |a, o| Ok(a.merge(o)))?;

    let states: Vec<i64> = k.states().collect();
    let mut estimates = Vec::new();
    let mut chi_square = 0.0;
    for (r, &i) in states.iter().enumerate() {
        let row_total: u64 = tally.transitions[r].iter().sum();
        if row_total == 0 {
            continue;
        }
        for (c, &j) in states.iter().enumerate() {
            let exact = k.get(i, j).clone();
            let expected = to_f64(&exact) * row_total as f64;
            let observed = tally.transitions[r][c] as f64;
            if expected > 0.0 {
                chi_square += (observed - expected).powi(2) / expected;
            }
            estimates.push(Estimate::new(
                format!("K({i},{j})"),
                tally.transitions[r][c],
                row_total,
                Some(exact),
            ));
        }
    }

    let pi = (cfg.n.is_multiple_of(2)).then(|| stationary(cfg.n)).transpose()?;
    let occ_total: u64 = tally.occupancy.iter().sum();
    let occupancy = states
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let exact = pi.as_ref().map(|p| p.probabilities[t].clone());
            let mut e = Estimate::new(format!("pi({s})"), tally.occupancy[t], occ_total, exact);
            // successive states are correlated; no binomial band applies
            e.sigma = None;
            e.within_3sigma = None;
            e
        })
        .collect();

    Ok(SimReport {
        kind: "chain",
        config: cfg.clone(),
        max_abs_deviation: max_dev(&estimates),
        estimates,
        occupancy,
        digits_uniform: digits_uniform(&tally.digits, b),
        digit_counts: label_digits(tally.digits, b),
        forbidden_observed: Vec::new(),
        chi_square,
    })
}

fn max_dev(estimates: &[Estimate]) -> f64 {
    estimates
        .iter()
        .filter_map(|e| e.deviation)
        .fold(0.0, |m, d| m.max(d.abs()))
}

fn signed_pairs() -> Vec<[SignedCarry; 2]> {
    use SignedCarry::*;
    let all = [Minus, Zero, Plus];
    all.iter().flat_map(|&x| all.iter().map(move |&y| [x, y])).collect()
}

fn pair_index(x: i8, y: i8) -> usize {
    ((x + 1) * 3 + (y + 1)) as usize
}

#[derive(Clone)]
struct ColumnTally {
    /// `runs[i]`: (hits, windows) for `a_i`, `2 <= i <= MAX_RUN`.
    runs: Vec<(u64, u64)>,
    pairs: Vec<u64>,
    pair_windows: u64,
    forbidden: Vec<u64>,
    digits: Vec<u64>,
}

impl ColumnTally {
    fn new(b: u64, forbidden: usize) -> Self {
        Self {
            runs: vec![(0, 0); MAX_RUN + 1],
            pairs: vec![0; 9],
            pair_windows: 0,
            forbidden: vec![0; forbidden],
            digits: vec![0; b as usize],
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for (a, x) in self.runs.iter_mut().zip(&o.runs) {
            a.0 += x.0;
            a.1 += x.1;
        }
        add_counts(&mut self.pairs, &o.pairs);
        self.pair_windows += o.pair_windows;
        add_counts(&mut self.forbidden, &o.forbidden);
        add_counts(&mut self.digits, &o.digits);
        self
    }
}

/// Adds columns of `length` iid digits and studies the signed carries.
///
/// Run and pair frequencies use windows separated by one unused carry, so
/// windows touch disjoint remainders and are independent; the binomial
/// band is then exact. Forbidden patterns are searched at every offset.
pub fn simulate_column(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let b = cfg.base;
    let h = half(b);
    let bi = b as i64;
    let sampler = digit_sampler(b);
    let forbidden = crate::pointprocess::forbidden_patterns(b);

    let tally = shards(cfg.trials, COLUMN_SHARD)
        .into_par_iter()
        .map(|(shard, count)| {
            let mut rng = shard_rng(cfg.seed, shard);
            let mut t = ColumnTally::new(b, forbidden.len());
            let mut carries: Vec<i8> = Vec::with_capacity(cfg.length);
            for _ in 0..count {
                carries.clear();
                let first = sampler.sample(&mut rng);
                t.digits[(first + h) as usize] += 1;
                let mut rem = first;
                for _ in 1..cfg.length {
                    let d = sampler.sample(&mut rng);
                    t.digits[(d + h) as usize] += 1;
                    let mut s = rem + d;
                    let c = if s > h {
                        s -= bi;
                        1
                    } else if s < -h {
                        s += bi;
                        -1
                    } else {
                        0
                    };
                    debug_assert_eq!(c, crate::pointprocess::carry_between(rem, s, b));
                    carries.push(c);
                    rem = s;
                }
                tally_column(&carries, &forbidden, &mut t);
            }
            t
        })
        .reduce(|| ColumnTally::new(b, forbidden.len()), ColumnTally::merge);

    let forbidden_observed: Vec<(String, u64)> = forbidden
        .iter()
        .zip(&tally.forbidden)
        .map(|(p, &c)| (format_signed(p), c))
        .collect();
    if let Some((p, c)) = forbidden_observed.iter().find(|(_, c)| *c > 0) {
        return Err(Error::InvariantViolation(format!(
            "forbidden carry pattern {p} observed {c} times"
        )));
    }

    let mut estimates = Vec::new();
    for i in 2..=MAX_RUN {
        let (hits, windows) = tally.runs[i];
        if windows > 0 {
            estimates.push(Estimate::new(format!("a_{i}"), hits, windows, Some(a_exact(i, b)?)));
        }
    }
    let mut chi_square = 0.0;
    if tally.pair_windows > 0 {
        for p in signed_pairs() {
            let exact = signed_pattern_probability(&p, b)?;
            let hits = tally.pairs[pair_index(p[0].value(), p[1].value())];
            let expected = to_f64(&exact) * tally.pair_windows as f64;
            if expected > 0.0 {
                chi_square += (hits as f64 - expected).powi(2) / expected;
            }
            estimates.push(Estimate::new(format_signed(&p), hits, tally.pair_windows, Some(exact)));
        }
    }

    Ok(SimReport {
        kind: "column",
        config: cfg.clone(),
        max_abs_deviation: max_dev(&estimates),
        estimates,
        occupancy: Vec::new(),
        digits_uniform: digits_uniform(&tally.digits, b),
        digit_counts: label_digits(tally.digits, b),
        forbidden_observed,
        chi_square,
    })
}

fn tally_column(carries: &[i8], forbidden: &[Vec<SignedCarry>], t: &mut ColumnTally) {
    let len = carries.len();
    for i in 2..=MAX_RUN {
        // windows of i-1 carries starting every i carries
        let w = i - 1;
        let mut start = 0;
        while start + w <= len {
            t.runs[i].1 += 1;
            if carries[start..start + w].iter().all(|&c| c != 0) {
                t.runs[i].0 += 1;
            }
            start += i;
        }
    }
    let mut start = 0;
    while start + 2 <= len {
        t.pairs[pair_index(carries[start], carries[start + 1])] += 1;
        t.pair_windows += 1;
        start += 3;
    }
    for (slot, pat) in t.forbidden.iter_mut().zip(forbidden) {
        *slot += carries
            .windows(pat.len())
            .filter(|w| w.iter().zip(pat).all(|(&c, p)| c == p.value()))
            .count() as u64;
    }
}
