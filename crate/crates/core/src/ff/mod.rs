//! Monte Carlo zeroness test over prime fields.
//!
//! A trial picks a random prime `p = 1 (mod n)` below `2^{5s}`, a random
//! element `h` that passes a cheap generator filter, sets
//! `omega = h^{(p-1)/n}` and evaluates the circuit at `omega` modulo `p`.
//! A zero value at a primitive root is forced whenever `f(zeta_n) = 0`; for
//! nonzero `f` a wrong answer needs `p` to divide the norm of `f(zeta_n)` or
//! `h` to miss being a generator, both of which are unlikely.

pub mod certificate;
pub mod primality;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::circuit::{Circuit, CircuitEvaluator, ProblemInstance};
use crate::nt::{log2_approx, prime_divisors_below};
use crate::{majority, trial_rng, Verdict};

pub use primality::{is_prime_deterministic, miller_rabin};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FfConfig {
    pub trials: usize,
    pub mr_rounds: u32,
    /// Prime draws allowed per unit of instance size.
    pub prime_draws_per_size: u64,
    pub generator_draws: u64,
}

impl Default for FfConfig {
    fn default() -> Self {
        FfConfig { trials: 15, mr_rounds: 64, prime_draws_per_size: 600, generator_draws: 1000 }
    }
}

/// Draws `p = 1 + k n` with `k` uniform in `[1, (2^{5s} - 1)/n]` until a
/// probable prime appears. `None` after `max_draws` misses, or when the
/// range holds no candidate at all.
pub fn sample_prime_1mod_n<R: Rng + ?Sized>(
    n: &BigUint,
    s: u64,
    rounds: u32,
    max_draws: u64,
    rng: &mut R,
) -> Option<BigUint> {
    let upper = BigUint::one() << (5 * s);
    let k_max = (&upper - 1u32) / n;
    if k_max.is_zero() {
        return None;
    }
    let one = BigUint::one();
    let k_end = &k_max + 1u32;
    for _ in 0..max_draws {
        let k = rng.gen_biguint_range(&one, &k_end);
        let p = &k * n + 1u32;
        if miller_rabin(&p, rounds, rng) {
            return Some(p);
        }
    }
    None
}

/// Primes `q < 10 log2(p - 1)` dividing `p - 1`: the divisors the generator
/// filter checks.
pub fn filter_primes(p: &BigUint) -> Vec<u64> {
    let pm1 = p - 1u32;
    if pm1.is_zero() {
        return Vec::new();
    }
    prime_divisors_below(&pm1, 10.0 * log2_approx(&pm1))
}

/// True iff `h^{(p-1)/q} != 1 (mod p)` for every `q` in `primes`.
pub fn passes_generator_filter(p: &BigUint, h: &BigUint, primes: &[u64]) -> bool {
    let pm1 = p - 1u32;
    primes.iter().all(|&q| !h.modpow(&(&pm1 / q), p).is_one())
}

/// Uniform `h` in `F_p^*` among those passing the generator filter.
pub fn sample_generator_candidate<R: Rng + ?Sized>(p: &BigUint, max_draws: u64, rng: &mut R) -> Option<BigUint> {
    let primes = filter_primes(p);
    let one = BigUint::one();
    for _ in 0..max_draws {
        let h = rng.gen_biguint_range(&one, p);
        if passes_generator_filter(p, &h, &primes) {
            return Some(h);
        }
    }
    None
}

/// `h^{(p-1)/n} mod p`; `None` unless `n` divides `p - 1`.
pub fn primitive_nth_root(p: &BigUint, h: &BigUint, n: &BigUint) -> Option<BigUint> {
    let (q, r) = (p - 1u32).div_rem(n);
    if !r.is_zero() {
        return None;
    }
    Some(h.modpow(&q, p))
}

struct ModP<'a> {
    p: &'a BigUint,
    pm1: BigUint,
    omega: &'a BigUint,
}

impl CircuitEvaluator for ModP<'_> {
    type Value = BigUint;
    type Error = std::convert::Infallible;

    fn input(&mut self, e: &BigUint) -> Result<BigUint, Self::Error> {
        Ok(self.omega.modpow(&(e % &self.pm1), self.p))
    }

    fn sum(&mut self, terms: &[(&BigInt, &BigUint)]) -> Result<BigUint, Self::Error> {
        let p = BigInt::from_biguint(Sign::Plus, self.p.clone());
        let mut acc = BigInt::zero();
        for (w, v) in terms {
            acc += *w * BigInt::from_biguint(Sign::Plus, (*v).clone());
        }
        Ok(acc.mod_floor(&p).magnitude().clone())
    }

    fn product(&mut self, factors: &[&BigUint]) -> Result<BigUint, Self::Error> {
        Ok(factors.iter().fold(BigUint::one() % self.p, |acc, f| (acc * *f) % self.p))
    }
}

/// Value of the circuit at `omega` in `F_p`, with exponents reduced modulo
/// `p - 1`.
pub fn eval_circuit_mod(circuit: &Circuit, p: &BigUint, omega: &BigUint) -> BigUint {
    let pm1 = if p.is_one() { BigUint::one() } else { p - 1u32 };
    match circuit.evaluate(&mut ModP { p, pm1, omega }) {
        Ok(v) => v,
        Err(never) => match never {},
    }
}

/// Record of one finite-field trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FfTrialTranscript {
    #[serde(serialize_with = "crate::serde_decimal")]
    pub p: BigUint,
    #[serde(serialize_with = "crate::serde_decimal")]
    pub h: BigUint,
    #[serde(serialize_with = "crate::serde_decimal")]
    pub omega: BigUint,
    #[serde(serialize_with = "crate::serde_decimal")]
    pub residue: BigUint,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FfTrialFailure {
    NoPrime,
    NoGenerator,
}

/// One trial: sample `p`, then `h`, evaluate at `omega`.
pub fn ff_trial<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    cfg: &FfConfig,
    rng: &mut R,
) -> Result<FfTrialTranscript, FfTrialFailure> {
    let s = instance.size();
    let p = sample_prime_1mod_n(&instance.n, s, cfg.mr_rounds, cfg.prime_draws_per_size * s, rng)
        .ok_or(FfTrialFailure::NoPrime)?;
    let h = sample_generator_candidate(&p, cfg.generator_draws, rng).ok_or(FfTrialFailure::NoGenerator)?;
    let omega = primitive_nth_root(&p, &h, &instance.n).expect("p = 1 mod n by construction");
    let residue = eval_circuit_mod(&instance.circuit, &p, &omega);
    let verdict = if residue.is_zero() { Verdict::Zero } else { Verdict::NonZero };
    Ok(FfTrialTranscript { p, h, omega, residue, verdict })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FfOutcome {
    pub verdict: Verdict,
    pub trials: Vec<Result<FfTrialTranscript, FfTrialFailure>>,
}

/// Majority over `cfg.trials` independent trials, trial `i` driven by
/// `trial_rng(seed, i)`.
pub fn cit_ff(instance: &ProblemInstance, seed: u64, cfg: &FfConfig) -> FfOutcome {
    let trials: Vec<_> = (0..cfg.trials as u64)
        .map(|i| ff_trial(instance, cfg, &mut trial_rng(seed, i)))
        .collect();
    let verdict = majority(trials.iter().map(|t| t.as_ref().map_or(Verdict::Inconclusive, |t| t.verdict)));
    FfOutcome { verdict, trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sparse_circuit;
    use crate::nt::primes_up_to;

    fn phi12() -> Circuit {
        sparse_circuit([(1, 0u32), (-1, 2), (1, 4)])
    }

    fn phi6() -> Circuit {
        sparse_circuit([(1, 0u32), (-1, 1), (1, 2)])
    }

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn worked_example_mod_13() {
        assert_eq!(eval_circuit_mod(&phi12(), &b(13), &b(4)), b(7));
        assert_eq!(eval_circuit_mod(&phi6(), &b(13), &b(4)), b(0));
        assert_eq!(eval_circuit_mod(&phi12(), &b(13), &b(2)), b(0));
        assert_eq!(eval_circuit_mod(&phi6(), &b(13), &b(2)), b(3));
    }

    #[test]
    fn roots_from_generators() {
        assert_eq!(primitive_nth_root(&b(13), &b(4), &b(12)), Some(b(4)));
        assert_eq!(primitive_nth_root(&b(13), &b(2), &b(12)), Some(b(2)));
        assert_eq!(primitive_nth_root(&b(13), &b(1), &b(4)), Some(b(1)));
        assert_eq!(primitive_nth_root(&b(13), &b(2), &b(5)), None);
    }

    #[test]
    fn generator_filter_mod_13() {
        let primes = filter_primes(&b(13));
        assert_eq!(primes, vec![2, 3]);
        assert!(!passes_generator_filter(&b(13), &b(4), &primes));
        assert!(passes_generator_filter(&b(13), &b(2), &primes));
        let mut rng = trial_rng(0, 0);
        for _ in 0..20 {
            assert_eq!(sample_generator_candidate(&b(3), 100, &mut rng), Some(b(2)));
            let h = sample_generator_candidate(&b(13), 100, &mut rng).unwrap();
            assert!([2u64, 6, 7, 11].contains(&u64::try_from(&h).unwrap()));
        }
    }

    #[test]
    fn prime_sampler_lands_in_range() {
        let admissible: Vec<u64> = primes_up_to(1024).into_iter().filter(|p| p % 4 == 1).collect();
        for seed in 0..50 {
            let p = sample_prime_1mod_n(&b(4), 2, 64, 1200, &mut trial_rng(seed, 0)).unwrap();
            assert!(admissible.contains(&u64::try_from(&p).unwrap()), "{p}");
            let q = sample_prime_1mod_n(&b(1), 2, 64, 1200, &mut trial_rng(seed, 1)).unwrap();
            assert!(q >= b(2) && q <= b(1024));
        }
        // no p = 1 mod 2^20 fits below 2^5
        assert_eq!(sample_prime_1mod_n(&b(1 << 20), 1, 64, 100, &mut trial_rng(0, 0)), None);
    }

    #[test]
    fn worked_example_engine() {
        let cfg = FfConfig::default();
        for seed in 0..5 {
            let zero = cit_ff(&ProblemInstance::new(phi12(), 12u32), seed, &cfg);
            assert_eq!(zero.verdict, Verdict::Zero);
            let nonzero = cit_ff(&ProblemInstance::new(phi6(), 12u32), seed, &cfg);
            assert_eq!(nonzero.verdict, Verdict::NonZero);
            let null = cit_ff(&ProblemInstance::new(sparse_circuit([(0, 3u32)]), 7u32), seed, &cfg);
            assert_eq!(null.verdict, Verdict::Zero);
        }
    }

    #[test]
    fn transcripts_satisfy_invariants() {
        let inst = ProblemInstance::new(phi6(), 12u32);
        let s = inst.size();
        let out = cit_ff(&inst, 11, &FfConfig::default());
        for t in out.trials.into_iter().map(Result::unwrap) {
            assert!(t.p <= BigUint::one() << (5 * s));
            assert!(((&t.p - 1u32) % 12u32).is_zero());
            assert_eq!(t.omega, t.h.modpow(&((&t.p - 1u32) / 12u32), &t.p));
        }
    }

    #[test]
    fn coprime_filter_matches_gcd_for_primorial() {
        // 510510 = 2*3*5*7*11*13*17; every prime factor lies below 10 log2 m
        let m = 510_510u64;
        let small = prime_divisors_below(&b(m), 10.0 * (m as f64).log2());
        let (mut accepted, mut coprime) = (0u64, 0u64);
        for k in 1..m {
            if small.iter().all(|q| k % q != 0) {
                accepted += 1;
                if num_integer::gcd(k, m) == 1 {
                    coprime += 1;
                }
            }
        }
        assert!(coprime as f64 / accepted as f64 > 0.9);
    }
}
