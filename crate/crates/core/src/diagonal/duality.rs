//! Rewriting `(a_1 u_1 + ... + a_m u_m)^d` as a combination of products of
//! shifted univariate powers, and Kronecker substitution to one variable.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::circuit::SparsePoly;

/// `beta * prod_r (u_r + alphas[r])^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityTerm {
    pub beta: BigRational,
    pub alphas: Vec<BigRational>,
    pub j: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("coefficient of variable {0} is zero")]
    ZeroCoefficient(usize),
    #[error("need at least one variable and d >= 1")]
    Empty,
}

/// Rational polynomial in `m` variables, keyed by exponent vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiPoly {
    pub terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn constant(m: usize, c: BigRational) -> Self {
        let mut p = MultiPoly::default();
        if !c.is_zero() {
            p.terms.insert(vec![0; m], c);
        }
        p
    }

    /// `u_r + shift`.
    pub fn shifted_var(m: usize, r: usize, shift: &BigRational) -> Self {
        let mut p = MultiPoly::constant(m, shift.clone());
        let mut e = vec![0; m];
        e[r] = 1;
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn add_scaled(&mut self, other: &MultiPoly, c: &BigRational) {
        for (e, v) in &other.terms {
            let slot = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *slot += v * c;
            if slot.is_zero() {
                self.terms.remove(e);
            }
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::default();
        for (e1, v1) in &self.terms {
            for (e2, v2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let slot = out.terms.entry(e).or_insert_with(BigRational::zero);
                *slot += v1 * v2;
            }
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    pub fn pow(&self, m: usize, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(m, BigRational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, u: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(u).fold(c.clone(), |acc, (&k, x)| acc * num_traits::pow(x.clone(), k as usize)))
            .sum()
    }
}

/// `(sum_r a_r u_r)^d` expanded.
pub fn linear_form_power(a: &[BigRational], d: u32) -> MultiPoly {
    let m = a.len();
    let mut form = MultiPoly::default();
    for (r, ar) in a.iter().enumerate() {
        form.add_scaled(&MultiPoly::shifted_var(m, r, &BigRational::zero()), ar);
    }
    form.pow(m, d)
}

/// Expands `sum beta prod_r (u_r + alpha_r)^j` symbolically.
pub fn expand_duality_terms(terms: &[DualityTerm], m: usize) -> MultiPoly {
    let mut out = MultiPoly::default();
    for t in terms {
        let mut prod = MultiPoly::constant(m, BigRational::one());
        for (r, alpha) in t.alphas.iter().enumerate() {
            prod = prod.mul(&MultiPoly::shifted_var(m, r, alpha).pow(m, t.j));
        }
        out.add_scaled(&prod, &t.beta);
    }
    out
}

/// Coefficients of `z^0, z^1, ...` in `prod_{j != i} (z - x_j) / (x_i - x_j)`.
fn lagrange_basis(nodes: &[BigRational], i: usize) -> Vec<BigRational> {
    let mut poly = vec![BigRational::one()];
    let mut denom = BigRational::one();
    for (j, xj) in nodes.iter().enumerate() {
        if j == i {
            continue;
        }
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * xj;
        }
        poly = next;
        denom *= &nodes[i] - xj;
    }
    poly.into_iter().map(|c| c / &denom).collect()
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Terms with `(sum_r a_r u_r)^d = sum beta prod_r (u_r + alpha_r)^j`, using
/// interpolation nodes `0, 1, ..., md`. Terms with `beta = 0` are dropped.
pub fn duality_expand(a: &[BigRational], d: u32) -> Result<Vec<DualityTerm>, DualityError> {
    let m = a.len();
    if m == 0 || d == 0 {
        return Err(DualityError::Empty);
    }
    if let Some(r) = a.iter().position(Zero::is_zero) {
        return Err(DualityError::ZeroCoefficient(r));
    }
    // P(z) = prod_r (z + a_r u_r) - z^m has degree m - 1 in z, and the
    // coefficient of z^{(m-1)d} in P(z)^d is the target power
    let nodes: Vec<BigRational> = (0..=(m as u64 * d as u64)).map(|v| BigRational::from_integer(v.into())).collect();
    let top = (m - 1) * d as usize;
    let a_prod: BigRational = a.iter().cloned().product();
    let mut out = Vec::new();
    for (i, alpha) in nodes.iter().enumerate() {
        let weight = lagrange_basis(&nodes, i)[top].clone();
        if weight.is_zero() {
            continue;
        }
        let alphas: Vec<BigRational> = a.iter().map(|ar| alpha / ar).collect();
        let shift = -num_traits::pow(alpha.clone(), m);
        for j in 0..=d {
            let beta = &weight
                * BigRational::from_integer(binomial(d, j))
                * num_traits::pow(shift.clone(), (d - j) as usize)
                * num_traits::pow(a_prod.clone(), j as usize);
            if !beta.is_zero() {
                out.push(DualityTerm { beta, alphas: alphas.clone(), j });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("term {term} has degree {degree} in variable {var}, not below {bound}")]
pub struct KroneckerError {
    pub term: usize,
    pub var: usize,
    pub degree: u64,
    pub bound: BigUint,
}

/// `x_r -> x^{D^r}` (variables counted from 0). Injective on monomials with
/// every individual degree below `D`.
pub fn kronecker_substitute(terms: &[(BigInt, Vec<u64>)], bound: &BigUint) -> Result<SparsePoly, KroneckerError> {
    let mut out = Vec::with_capacity(terms.len());
    for (t, (c, exps)) in terms.iter().enumerate() {
        let mut e = BigUint::zero();
        let mut place = BigUint::one();
        for (var, &k) in exps.iter().enumerate() {
            if BigUint::from(k) >= *bound {
                return Err(KroneckerError { term: t, var, degree: k, bound: bound.clone() });
            }
            e += &place * k;
            place *= bound;
        }
        out.push((c.clone(), e));
    }
    Ok(SparsePoly::from_terms(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn single_variable() {
        let terms = duality_expand(&[q(2)], 3).unwrap();
        let expanded = expand_duality_terms(&terms, 1);
        let mut expect = MultiPoly::default();
        expect.terms.insert(vec![3], q(8));
        assert_eq!(expanded, expect);
    }

    #[test]
    fn square_of_sum() {
        let terms = duality_expand(&[q(1), q(1)], 2).unwrap();
        let expanded = expand_duality_terms(&terms, 2);
        let mut expect = MultiPoly::default();
        expect.terms.insert(vec![2, 0], q(1));
        expect.terms.insert(vec![1, 1], q(2));
        expect.terms.insert(vec![0, 2], q(1));
        assert_eq!(expanded, expect);
    }

    #[test]
    fn sign_matters_for_even_m() {
        // m = 2, d = 1 exercises (-alpha^m)^{d-j} with d - j odd
        let a = [q(1), q(-3)];
        let terms = duality_expand(&a, 1).unwrap();
        assert_eq!(expand_duality_terms(&terms, 2), linear_form_power(&a, 1));
    }

    #[test]
    fn rejects_zero_coefficient() {
        assert_eq!(duality_expand(&[q(1), q(0)], 2), Err(DualityError::ZeroCoefficient(1)));
        assert_eq!(duality_expand(&[], 2), Err(DualityError::Empty));
    }

    #[test]
    fn kronecker_examples() {
        let d = BigUint::from(3u32);
        let one = BigInt::one();
        let p = kronecker_substitute(&[(one.clone(), vec![1, 1])], &d).unwrap();
        assert_eq!(p, SparsePoly::monomial(1, 4u32));
        assert!(kronecker_substitute(&[], &d).unwrap().is_zero());
        assert!(kronecker_substitute(&[(one, vec![0, 3])], &d).is_err());
    }
}
