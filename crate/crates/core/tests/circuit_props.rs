mod common;

use cit_core::circuit::{parse_circuit, print_circuit, syntactic_degree, to_sparse, ProblemInstance};
use num_bigint::BigUint;
use proptest::prelude::*;

use common::{circuit_cases, oracle_is_zero};

#[test]
fn fixture_mix_has_both_verdicts() {
    let cases = circuit_cases(90, 0);
    let zeros = cases.iter().filter(|c| oracle_is_zero(&c.instance)).count();
    assert!((10..80).contains(&zeros), "zeros {zeros}");
    assert!(cases.iter().all(|c| c.instance.circuit.size() <= 60));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansion_degree_is_bounded(seed in 0u64..10_000) {
        for case in circuit_cases(3, seed) {
            let c = &case.instance.circuit;
            let poly = to_sparse(c, 1 << 14).unwrap();
            let bound = c.max_exponent() * syntactic_degree(c);
            prop_assert!(poly.degree().is_none_or(|d| *d <= bound));
            // the expansion vanishes exactly when the circuit does
            let expanded = ProblemInstance::new(poly.to_circuit(), case.instance.n.clone());
            prop_assert_eq!(oracle_is_zero(&expanded), oracle_is_zero(&case.instance));
        }
    }

    #[test]
    fn text_round_trip(seed in 0u64..10_000) {
        for case in circuit_cases(3, seed) {
            let c = &case.instance.circuit;
            let back = parse_circuit(&print_circuit(c)).unwrap();
            prop_assert_eq!(back.size(), c.size());
            let n = BigUint::from(60u32);
            prop_assert_eq!(
                oracle_is_zero(&ProblemInstance::new(back, n.clone())),
                oracle_is_zero(&ProblemInstance::new(c.clone(), n))
            );
        }
    }
}
