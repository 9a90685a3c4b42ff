mod common;

use cit_core::circuit::SparsePoly;
use cit_core::oracle::{CyclotomicRing, OracleConfig};
use cit_core::sparse_cit::{sparse_cit, vanish_space};
use cit_core::{trial_rng, Verdict};
use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::Rng;

use common::oracle_kernel;

fn cfg() -> OracleConfig {
    OracleConfig::with_phi_cap(256)
}

fn random_exponents(rng: &mut impl Rng, n: u64, s: usize) -> Vec<BigUint> {
    let mut k: Vec<u64> = sample(rng, n as usize, s.min(n as usize)).into_iter().map(|x| x as u64).collect();
    k.sort_unstable();
    k.into_iter().map(BigUint::from).collect()
}

#[test]
fn vanishing_space_matches_oracle_kernel() {
    let mut rng = trial_rng(11, 0);
    for case in 0..250 {
        let n = rng.gen_range(1..=128u64);
        let s = rng.gen_range(1..=6usize);
        let k = random_exponents(&mut rng, n, s);
        let ring = CyclotomicRing::new(n, &cfg()).unwrap();
        let expected = oracle_kernel(&ring, &k);
        let got = vanish_space(&n.into(), &k);
        assert!(got.equivalent(&expected), "case {case}: n={n} k={k:?}");
        assert_eq!(got.dim() + got.orth_complement().dim(), k.len());
    }
}

#[test]
fn every_small_exponent_set() {
    // exhaustive over all subsets of size <= 4 for a few composite n
    for n in [6u64, 12, 30] {
        let ring = CyclotomicRing::new(n, &cfg()).unwrap();
        for mask in 1u64..(1 << n.min(12)) {
            if mask.count_ones() > 4 {
                continue;
            }
            let k: Vec<BigUint> = (0..n).filter(|i| mask >> i & 1 == 1).map(BigUint::from).collect();
            assert!(vanish_space(&n.into(), &k).equivalent(&oracle_kernel(&ring, &k)), "n={n} k={k:?}");
        }
    }
}

#[test]
fn coprime_split_identity() {
    let mut rng = trial_rng(12, 0);
    for (n1, n2) in [(4u64, 9u64), (3, 10), (5, 12), (7, 6), (8, 15)] {
        let n = n1 * n2;
        for _ in 0..20 {
            let s = rng.gen_range(1..=6usize);
            let k = random_exponents(&mut rng, n, s);
            let whole = vanish_space(&n.into(), &k).orth_complement();
            let a = vanish_space(&n1.into(), &k.iter().map(|e| e % n1).collect::<Vec<_>>());
            let b = vanish_space(&n2.into(), &k.iter().map(|e| e % n2).collect::<Vec<_>>());
            // vanish_space takes reduced, possibly colliding, exponents here
            let split = a.orth_complement().hadamard(&b.orth_complement()).unwrap();
            assert!(whole.equivalent(&split), "n={n1}*{n2} k={k:?}");
        }
    }
}

#[test]
fn sparse_engine_agrees_with_oracle() {
    let mut rng = trial_rng(13, 0);
    let mut zeros = 0;
    for case in 0..500 {
        let n = rng.gen_range(1..=128u64);
        let s = rng.gen_range(1..=8usize);
        // planted zeros: multiply a random sparse poly by a factor vanishing at zeta_n
        let mut f = SparsePoly::from_terms((0..s).map(|_| (rng.gen_range(-9i64..=9), rng.gen_range(0..n))));
        if case % 3 == 0 && n > 1 {
            let d = (2..=n).find(|d| n % d == 0).unwrap();
            let step = n / d;
            let coset = SparsePoly::from_terms((0..d).map(|j| (1i64, j * step)));
            f = f.mul(&coset).reduce_exponents(&n.into());
        }
        let ring = CyclotomicRing::new(n, &cfg()).unwrap();
        let mut value = ring.zero();
        for (c, e) in f.terms() {
            let term = ring.mul(&ring.constant(c.clone()), &ring.zeta_pow(e)).unwrap();
            value = ring.add(&value, &term).unwrap();
        }
        let expected = if value.is_zero() { Verdict::Zero } else { Verdict::NonZero };
        zeros += usize::from(value.is_zero());
        assert_eq!(sparse_cit(&f, &n.into()), expected, "case {case}: n={n} f={f:?}");
    }
    assert!(zeros > 50, "suite should contain zero instances, got {zeros}");
}

#[test]
fn repeated_exponents_match_oracle_kernel() {
    let mut rng = trial_rng(14, 0);
    for _ in 0..150 {
        let n = rng.gen_range(1..=60u64);
        let s = rng.gen_range(1..=6usize);
        let k: Vec<BigUint> = (0..s).map(|_| BigUint::from(rng.gen_range(0..2 * n))).collect();
        let ring = CyclotomicRing::new(n, &cfg()).unwrap();
        assert!(vanish_space(&n.into(), &k).equivalent(&oracle_kernel(&ring, &k)), "n={n} k={k:?}");
    }
}
