use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{Circuit, CircuitError, CircuitEvaluator};

/// `sum_i c_i x^{k_i}` with strictly increasing exponents and no zero
/// coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    terms: Vec<(BigInt, BigUint)>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sorts by exponent, merges like terms and drops zero coefficients.
    pub fn from_terms<C, E>(terms: impl IntoIterator<Item = (C, E)>) -> Self
    where
        C: Into<BigInt>,
        E: Into<BigUint>,
    {
        let mut acc: BTreeMap<BigUint, BigInt> = BTreeMap::new();
        for (c, e) in terms {
            *acc.entry(e.into()).or_default() += c.into();
        }
        SparsePoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect(),
        }
    }

    pub fn monomial(c: impl Into<BigInt>, e: impl Into<BigUint>) -> Self {
        Self::from_terms([(c.into(), e.into())])
    }

    pub fn terms(&self) -> &[(BigInt, BigUint)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = &BigUint> {
        self.terms.iter().map(|(_, e)| e)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigInt> {
        self.terms.iter().map(|(c, _)| c)
    }

    pub fn degree(&self) -> Option<&BigUint> {
        self.terms.last().map(|(_, e)| e)
    }

    /// Sum of absolute values of the coefficients.
    pub fn abs_coefficient_sum(&self) -> BigUint {
        self.terms.iter().map(|(c, _)| c.magnitude()).sum()
    }

    /// Reduces every exponent modulo `n` and re-normalises; `x^n = 1` at a
    /// primitive `n`-th root of unity, so the value there is unchanged.
    pub fn reduce_exponents(&self, n: &BigUint) -> SparsePoly {
        SparsePoly::from_terms(self.terms.iter().map(|(c, e)| (c.clone(), e % n)))
    }

    /// `f(x^l)`.
    pub fn compose_power(&self, l: &BigUint) -> SparsePoly {
        SparsePoly::from_terms(self.terms.iter().map(|(c, e)| (c.clone(), e * l)))
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        SparsePoly::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        SparsePoly::from_terms(
            self.terms.iter().cloned().chain(other.terms.iter().map(|(c, e)| (-c, e.clone()))),
        )
    }

    pub fn scale(&self, w: &BigInt) -> SparsePoly {
        SparsePoly::from_terms(self.terms.iter().map(|(c, e)| (c * w, e.clone())))
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut acc: BTreeMap<BigUint, BigInt> = BTreeMap::new();
        for (a, e) in &self.terms {
            for (b, f) in &other.terms {
                *acc.entry(e + f).or_default() += a * b;
            }
        }
        SparsePoly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect() }
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.terms
            .iter()
            .map(|(c, e)| {
                let e = u32::try_from(e).expect("exponent too large to evaluate at an integer");
                c * num_traits::Pow::pow(x, e)
            })
            .sum()
    }

    /// The circuit consisting of one sum gate over one leaf per term.
    pub fn to_circuit(&self) -> Circuit {
        super::sparse_circuit(self.terms.iter().cloned())
    }

    pub fn has_negative_coefficient(&self) -> bool {
        self.terms.iter().any(|(c, _)| c.is_negative())
    }
}

/// Signals that expansion would exceed the term budget.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("expansion exceeds the budget of {budget} terms")]
pub struct TooLarge {
    pub budget: usize,
}

struct Expand {
    budget: usize,
}

impl Expand {
    fn check(&self, p: SparsePoly) -> Result<SparsePoly, TooLarge> {
        if p.len() > self.budget {
            Err(TooLarge { budget: self.budget })
        } else {
            Ok(p)
        }
    }
}

impl CircuitEvaluator for Expand {
    type Value = SparsePoly;
    type Error = TooLarge;

    fn input(&mut self, e: &BigUint) -> Result<SparsePoly, TooLarge> {
        self.check(SparsePoly::monomial(1, e.clone()))
    }

    fn sum(&mut self, terms: &[(&BigInt, &SparsePoly)]) -> Result<SparsePoly, TooLarge> {
        let mut acc = SparsePoly::zero();
        for (w, p) in terms {
            acc = self.check(acc.add(&p.scale(w)))?;
        }
        Ok(acc)
    }

    fn product(&mut self, factors: &[&SparsePoly]) -> Result<SparsePoly, TooLarge> {
        let mut acc = SparsePoly::monomial(1, 0u32);
        for p in factors {
            if acc.len() * p.len() > self.budget.saturating_mul(self.budget.max(1)) && acc.len() > 1 && p.len() > 1 {
                // the product may still collapse, but computing it is not worth it
                return Err(TooLarge { budget: self.budget });
            }
            acc = self.check(acc.mul(p))?;
        }
        Ok(acc)
    }
}

/// Full expansion of the circuit, failing once any intermediate polynomial
/// has more than `term_budget` terms.
pub fn to_sparse(circuit: &Circuit, term_budget: usize) -> Result<SparsePoly, TooLarge> {
    circuit.evaluate(&mut Expand { budget: term_budget })
}

/// Sparse polynomial file: an `n` header plus one `coeff exponent` per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePolyFile {
    pub poly: SparsePoly,
    pub n: Option<BigUint>,
}

pub fn parse_sparse_poly_file(text: &str) -> Result<SparsePolyFile, CircuitError> {
    let mut raw_terms = Vec::new();
    let mut n = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CircuitError::Syntax { line: idx + 1, message };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["n", v] => {
                n = Some(v.parse::<BigUint>().map_err(|_| err(format!("invalid n `{v}`")))?);
            }
            [c, e] => {
                let c = c.parse::<BigInt>().map_err(|_| err(format!("invalid coefficient `{c}`")))?;
                let e = e.parse::<BigUint>().map_err(|_| err(format!("invalid exponent `{e}`")))?;
                raw_terms.push((c, e));
            }
            _ => return Err(err(format!("expected `coeff exponent`, found `{line}`"))),
        }
    }
    Ok(SparsePolyFile { poly: SparsePoly::from_terms(raw_terms), n })
}

pub fn print_sparse_poly_file(file: &SparsePolyFile) -> String {
    let mut out = String::new();
    if let Some(n) = &file.n {
        let _ = writeln!(out, "n {n}");
    }
    for (c, e) in file.poly.terms() {
        let _ = writeln!(out, "{c} {e}");
    }
    out
}
