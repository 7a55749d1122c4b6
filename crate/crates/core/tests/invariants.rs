use num_bigint::BigInt;
use proptest::prelude::*;

use balanced_carries::chain::{matrix_product, transition_matrix};
use balanced_carries::numeral::{add_with_trace, recompute_trace, to_balanced, BalancedNumeral};
use balanced_carries::pointprocess::{brute_force_string, string_probability};
use balanced_carries::spectral::{stationary, verify_spectrum};

fn odd_base() -> impl Strategy<Value = u64> {
    (1u64..=6).prop_map(|k| 2 * k + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn matrices_are_stochastic_and_symmetric(n in 1usize..=5, b in odd_base()) {
        let k = transition_matrix(n, b).unwrap();
        prop_assert!(k.is_stochastic());
        prop_assert!(k.is_negation_symmetric());
        prop_assert!(k.denominators_divide_base_power());
    }

    #[test]
    fn semigroup(n in 1usize..=4, a in odd_base(), c in odd_base()) {
        let p = matrix_product(&transition_matrix(n, a).unwrap(), &transition_matrix(n, c).unwrap()).unwrap();
        prop_assert_eq!(p, transition_matrix(n, a * c).unwrap());
    }

    #[test]
    fn spectrum_holds(half in 1usize..=3, b in odd_base()) {
        prop_assert!(verify_spectrum(2 * half, b).unwrap().passed());
    }

    #[test]
    fn addition_traces_recompute(b in odd_base(), xs in prop::collection::vec(-100_000i64..100_000, 2..7)) {
        let nums: Vec<BalancedNumeral> = xs.iter().map(|&x| to_balanced(&BigInt::from(x), b).unwrap()).collect();
        let (sum, trace) = add_with_trace(&nums, b).unwrap();
        prop_assert_eq!(sum.value(), BigInt::from(xs.iter().sum::<i64>()));
        prop_assert!(recompute_trace(&nums, &trace));
        let bound = (xs.len() as i64) / 2;
        prop_assert!(trace.carries.iter().all(|c| c.abs() <= bound.max(1)));
    }

    #[test]
    fn pattern_law_matches_enumeration(b in prop::sample::select(vec![3u64, 5, 7]), t in prop::collection::vec(any::<bool>(), 1..5)) {
        prop_assert_eq!(string_probability(&t, b).unwrap(), brute_force_string(&t, b).unwrap());
    }
}

#[test]
fn stationary_sums_to_one() {
    for n in (2..=10).step_by(2) {
        let p = stationary(n).unwrap().probabilities;
        let s: balanced_carries::Rational = p.iter().sum();
        assert_eq!(s, balanced_carries::rational::from_int(1));
    }
}
