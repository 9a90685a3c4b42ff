//! Exact zero test for sparse polynomials at a primitive root of unity.
//!
//! For exponents `k` the set of coefficient vectors `a` with
//! `sum a_i zeta_n^{k_i} = 0` is a rational subspace `V_n^k`. It is assembled
//! from one space per small prime power of `n` and one for the cofactor made
//! of large primes, combined through orthogonal complements and Hadamard
//! products.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::circuit::SparsePoly;
pub use crate::linalg::{DimensionMismatch, RationalSubspace};
use crate::nt::trial_divide;
use crate::Verdict;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFactorization {
    /// Primes `p <= s` with their exponents, increasing.
    pub small: Vec<(u64, u32)>,
    /// Cofactor with every prime factor `> s`.
    pub residual: BigUint,
}

pub fn partial_factor(n: &BigUint, s: usize) -> PartialFactorization {
    let (small, residual) = trial_divide(n, s as u64);
    PartialFactorization { small, residual }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("modulus has the prime factor {factor}, not above {s}")]
pub struct SmallFactor {
    pub factor: u64,
    pub s: usize,
}

/// Sorted distinct residues of `k` modulo `modulus` and the `t x s` 0/1
/// matrix summing the coordinates that share a residue.
pub fn collapse_map(k: &[BigUint], modulus: &BigUint) -> (Vec<BigUint>, Vec<Vec<BigInt>>) {
    let residues: Vec<BigUint> = k.iter().map(|e| e % modulus).collect();
    let mut index: BTreeMap<&BigUint, usize> = residues.iter().map(|r| (r, 0)).collect();
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let mut t = vec![vec![BigInt::zero(); k.len()]; index.len()];
    for (j, r) in residues.iter().enumerate() {
        t[index[r]][j] = BigInt::one();
    }
    let distinct = index.keys().map(|r| (*r).clone()).collect();
    (distinct, t)
}

/// `V_{p^e}^k` for a prime `p` and `e >= 1`.
pub fn vanish_space_prime_power(k: &[BigUint], p: u64, e: u32) -> RationalSubspace {
    let s = k.len();
    let pb = BigUint::from(p);
    let modulus = pb.pow(e);
    let coarse = pb.pow(e - 1);
    let (distinct, t) = collapse_map(k, &modulus);
    // on distinct residues a vanishing sum is a combination of full cosets
    // r + p^{e-1} Z, each of size exactly p
    let mut classes: BTreeMap<BigUint, Vec<usize>> = BTreeMap::new();
    for (i, r) in distinct.iter().enumerate() {
        classes.entry(r % &coarse).or_default().push(i);
    }
    let width = distinct.len();
    let cosets: Vec<Vec<BigInt>> = classes
        .values()
        .filter(|members| members.len() as u64 == p)
        .map(|members| {
            let mut v = vec![BigInt::zero(); width];
            for &i in members {
                v[i] = BigInt::one();
            }
            v
        })
        .collect();
    RationalSubspace::span(width, &cosets).preimage(&t, s)
}

/// `V_m^k` for `m` free of primes `<= len(k)`: only exact collisions cancel.
pub fn vanish_space_residual(k: &[BigUint], m: &BigUint) -> Result<RationalSubspace, SmallFactor> {
    let s = k.len();
    if let Some(&(factor, _)) = trial_divide(m, s as u64).0.first() {
        return Err(SmallFactor { factor, s });
    }
    let (_, t) = collapse_map(k, m);
    Ok(RationalSubspace::kernel_of(&t, s))
}

pub fn orth_complement(space: &RationalSubspace) -> RationalSubspace {
    space.orth_complement()
}

pub fn hadamard_product(u: &RationalSubspace, v: &RationalSubspace) -> Result<RationalSubspace, DimensionMismatch> {
    u.hadamard(v)
}

/// `V_n^k`. Repeated exponents are allowed; every collapse map sums them.
pub fn vanish_space(n: &BigUint, k: &[BigUint]) -> RationalSubspace {
    let s = k.len();
    let k: Vec<BigUint> = k.iter().map(|e| e % n).collect();
    if s == 0 {
        return RationalSubspace::zero(0);
    }
    let pf = partial_factor(n, s);
    let mut dual = vanish_space_residual(&k, &pf.residual)
        .expect("residual is free of small primes")
        .orth_complement();
    for &(p, e) in &pf.small {
        let part = vanish_space_prime_power(&k, p, e).orth_complement();
        dual = dual.hadamard(&part).expect("same ambient dimension");
    }
    dual.orth_complement()
}

/// Exponents reduced mod `n`, like terms merged.
pub fn normalize(f: &SparsePoly, n: &BigUint) -> SparsePoly {
    f.reduce_exponents(n)
}

/// Deterministic and exact.
pub fn sparse_cit(f: &SparsePoly, n: &BigUint) -> Verdict {
    let g = normalize(f, n);
    if g.is_zero() {
        return Verdict::Zero;
    }
    let k: Vec<BigUint> = g.exponents().cloned().collect();
    let a: Vec<BigInt> = g.coefficients().cloned().collect();
    if vanish_space(n, &k).contains(&a) {
        Verdict::Zero
    } else {
        Verdict::NonZero
    }
}

/// Whether `g(zeta_n^l) = g(zeta_n^j)`.
pub fn conjugates_equal(g: &SparsePoly, n: &BigUint, l: &BigUint, j: &BigUint) -> bool {
    debug_assert!(l.gcd(n).is_one() && j.gcd(n).is_one());
    let diff = g.compose_power(l).sub(&g.compose_power(j));
    sparse_cit(&diff, n) == Verdict::Zero
}
