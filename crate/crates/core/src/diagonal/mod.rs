//! Zero test for `f = sum_i g^{d_i}` at `zeta_n`, with `g` sparse and the
//! `d_i` small.
//!
//! If `g(zeta_n)` has more than `d = max d_i` distinct conjugates, `f` cannot
//! vanish. Otherwise `f(zeta_n)` has degree at most `d` and bounded height,
//! so a nonzero value is bounded away from zero and a rigorous numeric
//! evaluation decides. The conjugate count is taken over the subgroup
//! generated by small units, which is all of `Z_n^*` under GRH.

mod duality;

pub use duality::{
    duality_expand, expand_duality_terms, kronecker_substitute, linear_form_power, DualityError, DualityTerm,
    KroneckerError, MultiPoly,
};

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::circuit::SparsePoly;
use crate::nt::{bit_size_unsigned, euler_phi_u64, log2_approx};
use crate::numeric::{eval_sparse_ball, BallComplex};
use crate::sparse_cit::conjugates_equal;
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalInstance {
    pub g: SparsePoly,
    pub powers: Vec<u64>,
    pub n: BigUint,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagonalError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("numeric evaluation did not reach radius 2^{needed} (got 2^{got})")]
    PrecisionExhausted { got: i64, needed: i64 },
}

impl DiagonalInstance {
    pub fn new(g: SparsePoly, powers: Vec<u64>, n: impl Into<BigUint>) -> Result<Self, DiagonalError> {
        let inst = DiagonalInstance { g, powers, n: n.into() };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), DiagonalError> {
        if self.n.is_zero() {
            return Err(DiagonalError::Invalid("n must be positive".into()));
        }
        if self.powers.is_empty() {
            return Err(DiagonalError::Invalid("no powers given".into()));
        }
        if self.powers.contains(&0) {
            return Err(DiagonalError::Invalid("powers must be at least 1".into()));
        }
        Ok(())
    }

    /// `d = max d_i`.
    pub fn max_power(&self) -> u64 {
        self.powers.iter().copied().max().unwrap_or(0)
    }

    /// `M`, the sum of absolute coefficient values of `g`.
    pub fn coefficient_mass(&self) -> BigUint {
        self.g.abs_coefficient_sum()
    }

    /// `f` expanded as a sparse polynomial, for cross-checks on small inputs.
    pub fn expand(&self) -> SparsePoly {
        let g = self.g.reduce_exponents(&self.n);
        let mut f = SparsePoly::zero();
        for &d in &self.powers {
            let mut p = SparsePoly::monomial(1, 0u32);
            for _ in 0..d {
                p = p.mul(&g).reduce_exponents(&self.n);
            }
            f = f.add(&p);
        }
        f
    }
}

/// Text format: `n <int>`, then `g:` followed by `coeff exponent` lines,
/// then `powers: d1 d2 ...`. Each power must not exceed the file length.
pub fn parse_diagonal_file(text: &str) -> Result<DiagonalInstance, DiagonalError> {
    let mut n = None;
    let mut in_g = false;
    let mut terms = Vec::new();
    let mut powers = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DiagonalError::Syntax { line: idx + 1, message };
        if let Some(rest) = line.strip_prefix("powers:") {
            in_g = false;
            let list = rest
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| err(format!("invalid power `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(&big) = list.iter().find(|&&d| d as usize > text.len()) {
                return Err(err(format!("power {big} exceeds the file length {}", text.len())));
            }
            powers = Some(list);
            continue;
        }
        if line == "g:" {
            in_g = true;
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["n", v] => n = Some(v.parse::<BigUint>().map_err(|_| err(format!("invalid n `{v}`")))?),
            [c, e] if in_g => {
                let c = c.parse::<BigInt>().map_err(|_| err(format!("invalid coefficient `{c}`")))?;
                let e = e.parse::<BigUint>().map_err(|_| err(format!("invalid exponent `{e}`")))?;
                terms.push((c, e));
            }
            _ => return Err(err(format!("unexpected `{line}`"))),
        }
    }
    let n = n.ok_or(DiagonalError::Syntax { line: 0, message: "missing `n` header".into() })?;
    let powers = powers.ok_or(DiagonalError::Syntax { line: 0, message: "missing `powers:` line".into() })?;
    DiagonalInstance::new(SparsePoly::from_terms(terms), powers, n)
}

pub fn print_diagonal_file(inst: &DiagonalInstance) -> String {
    let mut out = format!("n {}\ng:\n", inst.n);
    for (c, e) in inst.g.terms() {
        out.push_str(&format!("{c} {e}\n"));
    }
    let powers: Vec<String> = inst.powers.iter().map(u64::to_string).collect();
    out.push_str(&format!("powers: {}\n", powers.join(" ")));
    out
}

/// How many small units to use as generators of `Z_n^*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GeneratorBound {
    /// `max(16, ceil(c log2(n)^2))`.
    Multiplier(f64),
    /// `max(16, ceil(ln n ln ln n / ln 2))`.
    Heuristic,
}

impl Default for GeneratorBound {
    fn default() -> Self {
        GeneratorBound::Multiplier(3.0)
    }
}

pub fn generator_bound(n: &BigUint, mode: GeneratorBound) -> u64 {
    let lg = log2_approx(n);
    let raw = match mode {
        GeneratorBound::Multiplier(c) => c * lg * lg,
        GeneratorBound::Heuristic => {
            let ln = lg * std::f64::consts::LN_2;
            if ln > 1.0 {
                ln * ln.ln() / std::f64::consts::LN_2
            } else {
                0.0
            }
        }
    };
    (raw.ceil() as u64).max(16)
}

/// Units `2 <= k <= bound` of `Z_n`, reduced below `n`.
pub fn small_units(n: &BigUint, bound: u64) -> Vec<BigUint> {
    let top = n.to_u64().map_or(bound, |v| bound.min(v.saturating_sub(1)));
    (2..=top).map(BigUint::from).filter(|k| k.gcd(n).is_one()).collect()
}

/// Whether `gens` generate all of `Z_n^*`; `None` when `n` is too large to
/// check by enumeration.
pub fn generates_units(n: &BigUint, gens: &[BigUint]) -> Option<bool> {
    const LIMIT: u64 = 1 << 22;
    let n = n.to_u64().filter(|&v| v <= LIMIT)?;
    if n <= 2 {
        return Some(true);
    }
    let gens: Vec<u64> = gens.iter().filter_map(ToPrimitive::to_u64).collect();
    let mut seen = vec![false; n as usize];
    seen[1] = true;
    let mut stack = vec![1u64];
    let mut count = 1u64;
    while let Some(a) = stack.pop() {
        for &k in &gens {
            let b = (a as u128 * k as u128 % n as u128) as u64;
            if !seen[b as usize] {
                seen[b as usize] = true;
                count += 1;
                stack.push(b);
            }
        }
    }
    Some(count == euler_phi_u64(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Orbit {
    /// More than `d` distinct conjugates.
    ExceedsD,
    /// One representative `a` per distinct value `g(zeta_n^a)`, the smallest
    /// unit found with that value.
    #[serde(serialize_with = "serialize_reps")]
    Classes(Vec<BigUint>),
}

fn serialize_reps<S: serde::Serializer>(reps: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(reps.iter().map(ToString::to_string))
}

/// Breadth-first search over `g(zeta_n^a)` for `a` in the subgroup generated
/// by the units `<= bound`, stopping once more than `d` values are seen.
pub fn orbit(inst: &DiagonalInstance, bound: u64) -> Orbit {
    let n = &inst.n;
    let g = inst.g.reduce_exponents(n);
    let d = inst.max_power() as usize;
    let gens = small_units(n, bound);
    // explore from the first member of each class; the group is abelian
    let mut first = vec![BigUint::one()];
    let mut smallest = first.clone();
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for k in &gens {
            let b = (&first[c] * k) % n;
            let hit = (0..first.len()).find(|&i| b == first[i] || conjugates_equal(&g, n, &b, &first[i]));
            match hit {
                Some(i) => {
                    if b < smallest[i] {
                        smallest[i] = b;
                    }
                }
                None => {
                    if first.len() == d {
                        return Orbit::ExceedsD;
                    }
                    first.push(b.clone());
                    smallest.push(b);
                    queue.push_back(first.len() - 1);
                }
            }
        }
    }
    Orbit::Classes(smallest)
}

/// `log2_eps` with `2^log2_eps <= 2 / (d^{d+1} H^d)`, `H = 2^d s M^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationBound {
    pub log2_eps: i64,
}

pub fn separation_bound(inst: &DiagonalInstance) -> SeparationBound {
    separation_bound_for(inst.max_power(), inst.powers.len() as u64, &inst.coefficient_mass())
}

pub fn separation_bound_for(d: u64, s: u64, m: &BigUint) -> SeparationBound {
    let d32 = u32::try_from(d).expect("power fits in u32");
    let h = (BigUint::one() << d) * s * m.pow(d32);
    let denom = BigUint::from(d).pow(d32 + 1) * h.pow(d32);
    // 2/D >= 2^{1 - ceil(log2 D)} and ceil(log2 D) = bits(D - 1)
    let ceil_log = if denom.is_zero() { 0 } else { bit_size_exact(&(denom - 1u32)) };
    SeparationBound { log2_eps: 1 - ceil_log as i64 }
}

fn bit_size_exact(v: &BigUint) -> u64 {
    if v.is_zero() {
        0
    } else {
        bit_size_unsigned(v)
    }
}

#[derive(Clone, Debug, Default)]
pub struct DiagonalConfig {
    pub generators: GeneratorBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalOutcome {
    pub verdict: Verdict,
    /// The verdict depends on the small units generating `Z_n^*`.
    pub conditional: bool,
    pub generator_bound: u64,
    pub orbit: Orbit,
    pub log2_eps: Option<i64>,
    /// Ball around `f(zeta_n)` used for the threshold, as floats.
    pub value: Option<(f64, f64)>,
    pub rad_log2: Option<i64>,
}

pub fn diagonal_cit(inst: &DiagonalInstance, cfg: &DiagonalConfig) -> Result<DiagonalOutcome, DiagonalError> {
    inst.validate()?;
    let bound = generator_bound(&inst.n, cfg.generators);
    let mut out = DiagonalOutcome {
        verdict: Verdict::Zero,
        conditional: false,
        generator_bound: bound,
        orbit: Orbit::Classes(vec![BigUint::one()]),
        log2_eps: None,
        value: None,
        rad_log2: None,
    };
    if inst.g.reduce_exponents(&inst.n).is_zero() {
        return Ok(out);
    }
    out.orbit = orbit(inst, bound);
    if out.orbit == Orbit::ExceedsD {
        out.verdict = Verdict::NonZero;
        return Ok(out);
    }
    let sep = separation_bound(inst);
    out.log2_eps = Some(sep.log2_eps);
    let ball = eval_f_ball(inst, sep.log2_eps)?;
    out.value = Some(ball.to_f64());
    out.rad_log2 = ball.rad_log2();
    // rad < eps/4, so a zero value leaves |mid| < eps/4 and a nonzero one
    // leaves |mid| > 3 eps/4; eps/2 sits between
    out.verdict = if ball.mid_abs_below(sep.log2_eps - 1) { Verdict::Zero } else { Verdict::NonZero };
    if out.verdict == Verdict::Zero {
        let gens = small_units(&inst.n, bound);
        out.conditional = generates_units(&inst.n, &gens) != Some(true);
    }
    Ok(out)
}

/// Ball around `f(zeta_n)` with radius below `2^{log2_eps - 2}`.
fn eval_f_ball(inst: &DiagonalInstance, log2_eps: i64) -> Result<BallComplex, DiagonalError> {
    let needed = log2_eps - 2;
    let d = inst.max_power();
    let growth = d * (bit_size_unsigned(&inst.coefficient_mass()) + 2) + 64 - inst.powers.len().leading_zeros() as u64;
    let mut bits = (-needed).max(0) as u64 + growth + 16;
    for attempt in 0..2 {
        let ball = eval_f_at(inst, bits);
        if ball.rad_below(needed) {
            return Ok(ball);
        }
        if attempt == 1 {
            return Err(DiagonalError::PrecisionExhausted { got: ball.rad_log2().unwrap_or(i64::MIN), needed });
        }
        bits *= 2;
    }
    unreachable!()
}

fn eval_f_at(inst: &DiagonalInstance, bits: u64) -> BallComplex {
    let prec = bits as i64;
    let g = eval_sparse_ball(&inst.g, &inst.n, &BigUint::one(), bits);
    let mut sorted = inst.powers.clone();
    sorted.sort_unstable();
    let mut acc = BallComplex::zero();
    let mut power = BallComplex::one();
    let mut have = 0;
    for d in sorted {
        while have < d {
            power = power.mul(&g, prec);
            have += 1;
        }
        acc = acc.add(&power);
    }
    acc
}
