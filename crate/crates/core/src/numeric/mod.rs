//! Zeroness test for bounded-degree circuits by evaluation at a random Galois
//! conjugate `zeta_n^a` in rigorous ball arithmetic.
//!
//! A nonzero algebraic integer of moderate degree cannot have most of its
//! conjugates tiny, so thresholding `|f(zeta_n^a)|` at `2^{-4s-1}` errs with
//! bounded probability. The error of the numeric evaluation itself is
//! tracked by the ball radius and never exceeds `2^{-4s-2}` on success.

mod ball;
mod consts;

pub use ball::{BallComplex, Dyadic};
pub use consts::{approx_dyadic_turn, approx_pi, approx_root_of_unity};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{syntactic_degree, Circuit, CircuitEvaluator, ProblemInstance, SparsePoly};
use crate::nt::{log2_approx, prime_divisors_below};
use crate::oracle::CycloElem;
use crate::{majority, trial_rng, Verdict};

/// Per-leaf accuracy `2^-eps_exponent`, verdict threshold
/// `2^-threshold_exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionBudget {
    pub eps_exponent: u64,
    pub threshold_exponent: u64,
    /// Midpoints are kept to multiples of `2^-working_bits`.
    pub working_bits: u64,
}

impl PrecisionBudget {
    /// `E = s^2 + 5s + 1`, raised to `sd + d + 4s + 1` when the degree `d`
    /// exceeds `s`; working precision `E + 2s`.
    pub fn new(s: u64, d: u64) -> Self {
        let base = s * s + 5 * s + 1;
        let by_degree = s * d + d + 4 * s + 1;
        Self::with_eps(base.max(by_degree), s)
    }

    pub fn with_eps(eps_exponent: u64, s: u64) -> Self {
        PrecisionBudget { eps_exponent, threshold_exponent: 4 * s + 1, working_bits: eps_exponent + 2 * s }
    }

    pub fn doubled(&self) -> Self {
        let s = (self.threshold_exponent - 1) / 4;
        Self::with_eps(2 * self.eps_exponent, s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum NumericError {
    #[error("final radius 2^{rad_log2:?} is not below 2^-{needed}")]
    PrecisionExhausted { rad_log2: Option<i64>, needed: u64 },
    #[error("engine not applicable: {0}")]
    NotApplicable(String),
}

/// Uniform `a` in `[1, n)` sharing no prime below `10 log2 n` with `n`. For
/// `n < 2^16` the units of `Z_n` are enumerated instead, so `a` is always a
/// unit. `n = 1` yields `0`.
pub fn sample_conjugate_exponent<R: Rng + ?Sized>(n: &BigUint, attempts: u64, rng: &mut R) -> Option<BigUint> {
    if n.is_one() {
        return Some(BigUint::zero());
    }
    if let Some(small) = n.to_u64().filter(|&v| v < 1 << 16) {
        let units: Vec<u64> = (1..small).filter(|a| a.gcd(&small) == 1).collect();
        return Some(BigUint::from(units[rng.gen_range(0..units.len())]));
    }
    let primes = prime_divisors_below(n, 10.0 * log2_approx(n));
    let one = BigUint::one();
    for _ in 0..attempts {
        let a = rng.gen_biguint_range(&one, n);
        if primes.iter().all(|&q| !(&a % q).is_zero()) {
            return Some(a);
        }
    }
    None
}

struct BallEval<'a> {
    n: &'a BigUint,
    a: &'a BigUint,
    leaf_bits: u64,
    working: i64,
}

impl CircuitEvaluator for BallEval<'_> {
    type Value = BallComplex;
    type Error = std::convert::Infallible;

    fn input(&mut self, e: &BigUint) -> Result<BallComplex, Self::Error> {
        let ell = (self.a * (e % self.n)) % self.n;
        Ok(approx_root_of_unity(self.n, &ell, self.leaf_bits))
    }

    fn sum(&mut self, terms: &[(&BigInt, &BallComplex)]) -> Result<BallComplex, Self::Error> {
        let mut acc = BallComplex::zero();
        for (w, v) in terms {
            if !w.is_zero() {
                acc = acc.add(&v.scale_int(w));
            }
        }
        Ok(acc.round(self.working))
    }

    fn product(&mut self, factors: &[&BallComplex]) -> Result<BallComplex, Self::Error> {
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = acc.mul(f, self.working);
        }
        Ok(acc)
    }
}

/// Ball enclosing `f(zeta_n^a)`: leaves to `2^-E`, midpoints to `E + 2s`
/// bits. Fails if the final radius is not below `2^{-threshold-1}`.
pub fn eval_circuit_ball(
    circuit: &Circuit,
    n: &BigUint,
    a: &BigUint,
    budget: &PrecisionBudget,
) -> Result<BallComplex, NumericError> {
    let mut ev = BallEval { n, a, leaf_bits: budget.eps_exponent, working: budget.working_bits as i64 };
    let ball = match circuit.evaluate(&mut ev) {
        Ok(b) => b,
        Err(never) => match never {},
    };
    let needed = budget.threshold_exponent + 1;
    if !ball.rad_below(-(needed as i64)) {
        return Err(NumericError::PrecisionExhausted { rad_log2: ball.rad_log2(), needed });
    }
    Ok(ball)
}

/// Ball enclosing `sum_k c_k zeta_n^{a e_k}` with radius at most `2^-bits`.
pub fn eval_sparse_ball(poly: &SparsePoly, n: &BigUint, a: &BigUint, bits: u64) -> BallComplex {
    let scale: u64 = poly.terms().iter().map(|(c, _)| c.bits() + 1).max().unwrap_or(0)
        + u64::from(64 - (poly.len() as u64).leading_zeros());
    let mut acc = BallComplex::zero();
    for (c, e) in poly.terms() {
        let ell = (a * (e % n)) % n;
        acc = acc.add(&approx_root_of_unity(n, &ell, bits + scale).scale_int(c));
    }
    acc.round(bits as i64 + 1)
}

/// Ball enclosing the exact oracle value `elem` transported to
/// `zeta_n^a`, radius at most `2^-bits`.
pub fn render_cyclo_elem(elem: &CycloElem, a: u64, bits: u64) -> BallComplex {
    let poly = SparsePoly::from_terms(elem.coeffs().iter().enumerate().map(|(k, c)| (c.clone(), k as u64)));
    eval_sparse_ball(&poly, &BigUint::from(elem.n()), &BigUint::from(a), bits)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericTrialTranscript {
    #[serde(serialize_with = "crate::serde_decimal")]
    pub a: BigUint,
    pub eps_exponent: u64,
    pub retried: bool,
    /// Midpoint in floating point, for diagnostics only.
    pub mid: (f64, f64),
    pub rad_log2: Option<i64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericConfig {
    pub trials: usize,
    /// Rejection-sampling attempts for the conjugate exponent.
    pub attempts: u64,
    /// Explicit budget; `None` derives it from the instance.
    pub budget: Option<PrecisionBudget>,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig { trials: 25, attempts: 1000, budget: None }
    }
}

/// Largest `E` accepted before the engine declines the instance.
const MAX_EPS_EXPONENT: u64 = 1 << 22;

/// Budget for an instance: `s` is its size, `d` the syntactic degree.
pub fn budget_for(instance: &ProblemInstance) -> Result<PrecisionBudget, NumericError> {
    let s = instance.size();
    let d = syntactic_degree(&instance.circuit)
        .to_u64()
        .filter(|&d| d <= MAX_EPS_EXPONENT)
        .ok_or_else(|| NumericError::NotApplicable("syntactic degree too large".into()))?;
    let budget = PrecisionBudget::new(s, d);
    if budget.eps_exponent > MAX_EPS_EXPONENT {
        return Err(NumericError::NotApplicable(format!(
            "required precision 2^-{} exceeds the engine limit",
            budget.eps_exponent
        )));
    }
    Ok(budget)
}

/// One run: sample `a`, evaluate, threshold. Retries once at doubled
/// precision if the radius is too large.
pub fn numeric_trial_with<R: Rng + ?Sized>(
    circuit: &Circuit,
    n: &BigUint,
    budget: &PrecisionBudget,
    attempts: u64,
    rng: &mut R,
) -> Result<NumericTrialTranscript, NumericError> {
    let a = sample_conjugate_exponent(n, attempts, rng)
        .ok_or_else(|| NumericError::NotApplicable("no admissible conjugate exponent found".into()))?;
    let (ball, used, retried) = match eval_circuit_ball(circuit, n, &a, budget) {
        Ok(b) => (b, *budget, false),
        Err(NumericError::PrecisionExhausted { .. }) => {
            let wider = budget.doubled();
            (eval_circuit_ball(circuit, n, &a, &wider)?, wider, true)
        }
        Err(e) => return Err(e),
    };
    let zero = ball.mid_abs_below(-(used.threshold_exponent as i64));
    Ok(NumericTrialTranscript {
        a,
        eps_exponent: used.eps_exponent,
        retried,
        mid: ball.to_f64(),
        rad_log2: ball.rad_log2(),
        verdict: if zero { Verdict::Zero } else { Verdict::NonZero },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericOutcome {
    pub verdict: Verdict,
    pub budget: PrecisionBudget,
    /// Whether the absolute coefficient sum was at most `2^{sd}`, the
    /// assumption behind the precision budget.
    pub coefficient_bound_held: bool,
    pub trials: Vec<Result<NumericTrialTranscript, NumericError>>,
}

/// Upper bound on the absolute coefficient sum of the expanded circuit:
/// its value at `x = 1` with every weight replaced by its magnitude.
pub fn abs_coefficient_bound(circuit: &Circuit) -> BigUint {
    struct AbsAtOne;
    impl CircuitEvaluator for AbsAtOne {
        type Value = BigUint;
        type Error = std::convert::Infallible;
        fn input(&mut self, _: &BigUint) -> Result<BigUint, Self::Error> {
            Ok(BigUint::one())
        }
        fn sum(&mut self, terms: &[(&BigInt, &BigUint)]) -> Result<BigUint, Self::Error> {
            Ok(terms.iter().map(|(w, v)| w.magnitude() * *v).sum())
        }
        fn product(&mut self, factors: &[&BigUint]) -> Result<BigUint, Self::Error> {
            Ok(factors.iter().fold(BigUint::one(), |acc, f| acc * *f))
        }
    }
    match circuit.evaluate(&mut AbsAtOne) {
        Ok(v) => v,
        Err(never) => match never {},
    }
}

/// `v <= 2^k`.
fn at_most_pow2(v: &BigUint, k: u64) -> bool {
    let bits = v.bits();
    bits <= k || (bits == k + 1 && v.trailing_zeros() == Some(k))
}

/// Majority over `cfg.trials` runs, trial `i` driven by `trial_rng(seed, i)`.
pub fn cit_numeric(instance: &ProblemInstance, seed: u64, cfg: &NumericConfig) -> Result<NumericOutcome, NumericError> {
    let budget = match cfg.budget {
        Some(b) => b,
        None => budget_for(instance)?,
    };
    let s = instance.size();
    let d = syntactic_degree(&instance.circuit).to_u64().unwrap_or(u64::MAX);
    let coefficient_bound_held = at_most_pow2(&abs_coefficient_bound(&instance.circuit), s.saturating_mul(d));
    let trials: Vec<_> = (0..cfg.trials as u64)
        .map(|i| numeric_trial_with(&instance.circuit, &instance.n, &budget, cfg.attempts, &mut trial_rng(seed, i)))
        .collect();
    if let Some(Err(e)) = trials.iter().find(|t| t.is_err()) {
        if trials.iter().filter(|t| t.is_err()).count() * 2 > trials.len() {
            return Err(e.clone());
        }
    }
    let verdict = majority(trials.iter().map(|t| t.as_ref().map_or(Verdict::Inconclusive, |t| t.verdict)));
    Ok(NumericOutcome { verdict, budget, coefficient_bound_held, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{sparse_circuit, CircuitBuilder};
    use crate::oracle::{all_conjugate_values, CyclotomicRing, OracleConfig};

    fn phi12() -> Circuit {
        sparse_circuit([(1, 0u32), (-1, 2), (1, 4)])
    }

    fn phi6() -> Circuit {
        sparse_circuit([(1, 0u32), (-1, 1), (1, 2)])
    }

    #[test]
    fn budget_formula() {
        let b = PrecisionBudget::new(14, 1);
        assert_eq!((b.eps_exponent, b.threshold_exponent, b.working_bits), (14 * 14 + 70 + 1, 57, 267 + 28));
        assert_eq!(PrecisionBudget::new(3, 10).eps_exponent, 30 + 10 + 12 + 1);
    }

    #[test]
    fn phi12_encloses_zero() {
        let inst = ProblemInstance::new(phi12(), 12u32);
        let budget = budget_for(&inst).unwrap();
        let ball = eval_circuit_ball(&inst.circuit, &inst.n, &BigUint::one(), &budget).unwrap();
        assert!(ball.mid_abs_below(-(budget.threshold_exponent as i64)));
        assert!(ball.rad_below(-(budget.threshold_exponent as i64) - 1));
    }

    #[test]
    fn constant_is_exact() {
        let c = sparse_circuit([(5, 0u32)]);
        let ball = eval_circuit_ball(&c, &BigUint::from(9u32), &BigUint::from(2u32), &PrecisionBudget::new(5, 1)).unwrap();
        assert_eq!(ball, BallComplex::from_int(5));
    }

    #[test]
    fn phi6_at_zeta12_matches_oracle() {
        let ring = CyclotomicRing::new(12, &OracleConfig::default()).unwrap();
        let exact = crate::oracle::eval_circuit_exact(&phi6(), &ring).unwrap();
        let budget = PrecisionBudget::new(14, 1);
        let ball = eval_circuit_ball(&phi6(), &BigUint::from(12u32), &BigUint::one(), &budget).unwrap();
        assert!(!ball.mid_abs_below(-1));
        let reference = render_cyclo_elem(&exact, 1, 64);
        assert!(ball.overlaps(&reference));
        // 1 - zeta_12 + zeta_6 has modulus sqrt(3) * |...|: compare in floating point
        let (re, im) = ball.to_f64();
        let t = std::f64::consts::PI / 6.0;
        let want = (1.0 - t.cos() + (2.0 * t).cos(), -t.sin() + (2.0 * t).sin());
        assert!((re - want.0).abs() < 1e-12 && (im - want.1).abs() < 1e-12);
    }

    #[test]
    fn enclosure_soundness_over_all_conjugates() {
        let mut b = CircuitBuilder::new();
        let x = b.input(3u32);
        let y = b.input(7u32);
        let one = b.input(0u32);
        let s1 = b.sum([(2, x), (-3, y), (1, one)]);
        let s2 = b.sum([(1, x), (4, one)]);
        let p = b.product([s1, s2, s1]);
        let c = b.finish(p).unwrap();
        for n in [5u64, 8, 9, 12, 21] {
            let inst = ProblemInstance::new(c.clone(), n);
            let budget = budget_for(&inst).unwrap();
            let ring = CyclotomicRing::new(n, &OracleConfig::default()).unwrap();
            let s = inst.size();
            for (a, v) in all_conjugate_values(&c, &ring).unwrap() {
                let ball = eval_circuit_ball(&c, &inst.n, &BigUint::from(a), &budget).unwrap();
                // v is the conjugate as an element, so it is rendered at zeta itself
                let exact = render_cyclo_elem(&v, 1, 4 * (4 * s + 1));
                assert!(ball.overlaps(&exact), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn engine_on_worked_examples() {
        let cfg = NumericConfig::default();
        for seed in 0..3 {
            let zero = cit_numeric(&ProblemInstance::new(phi12(), 12u32), seed, &cfg).unwrap();
            assert_eq!(zero.verdict, Verdict::Zero);
            assert!(zero.coefficient_bound_held);
            let nonzero = cit_numeric(&ProblemInstance::new(phi6(), 12u32), seed, &cfg).unwrap();
            assert_eq!(nonzero.verdict, Verdict::NonZero);
        }
    }

    #[test]
    fn huge_exponents() {
        let big = BigUint::one() << 30u32;
        let small = &big % 12u32;
        let c = sparse_circuit([(BigInt::from(1), big), (BigInt::from(-1), small)]);
        let out = cit_numeric(&ProblemInstance::new(c, 12u32), 4, &NumericConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Zero);
    }

    #[test]
    fn conjugate_sampling() {
        let mut rng = trial_rng(3, 0);
        let n40 = BigUint::one() << 40u32;
        for _ in 0..100 {
            assert!(sample_conjugate_exponent(&n40, 100, &mut rng).unwrap().bit(0));
            let a = sample_conjugate_exponent(&BigUint::from(6u32), 100, &mut rng).unwrap();
            assert!(a == BigUint::one() || a == BigUint::from(5u32));
        }
        assert_eq!(sample_conjugate_exponent(&BigUint::one(), 1, &mut rng), Some(BigUint::zero()));
    }

    #[test]
    fn conjugate_filter_against_trial_division() {
        // 9699690 = 2*3*5*7*11*13*17*19, all below 10 log2 n
        let n = 9_699_690u64;
        let mut rng = trial_rng(5, 0);
        for _ in 0..10_000 {
            let a = sample_conjugate_exponent(&BigUint::from(n), 1000, &mut rng).unwrap();
            let a = a.to_u64().unwrap();
            assert!((1..n).contains(&a));
            assert!([2u64, 3, 5, 7, 11, 13, 17, 19].iter().all(|q| a % q != 0));
        }
    }
}
