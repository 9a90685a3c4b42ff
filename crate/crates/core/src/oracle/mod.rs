//! Exact arithmetic in `Z[zeta_n] = Z[x]/Phi_n(x)` for small `n`.
//!
//! Everything here is exact and deterministic. The probabilistic engines are
//! validated against it.

mod poly;

pub use poly::{det_bareiss, resultant, IntPoly};

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitEvaluator};
use crate::nt::{divisors_u64, euler_phi_u64, gcd_u64};

/// Largest `phi(n)` handled unless overridden.
pub const DEFAULT_PHI_CAP: u64 = 128;
/// Largest coefficient bit length tolerated during evaluation.
pub const DEFAULT_COEFF_BITS: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub phi_cap: u64,
    pub coeff_bits: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { phi_cap: DEFAULT_PHI_CAP, coeff_bits: DEFAULT_COEFF_BITS }
    }
}

impl OracleConfig {
    /// Defaults, with the `phi` cap taken from `CIT_ORACLE_CAP` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(cap) = std::env::var("CIT_ORACLE_CAP").ok().and_then(|v| v.trim().parse().ok()) {
            cfg.phi_cap = cap;
        }
        cfg
    }

    pub fn with_phi_cap(phi_cap: u64) -> Self {
        OracleConfig { phi_cap, ..Self::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("phi({n}) exceeds the oracle cap {cap}")]
    CapExceeded { n: BigUint, cap: u64 },
    #[error("coefficient of {bits} bits exceeds the safety bound of {bound} bits")]
    CoefficientOverflow { bits: u64, bound: u64 },
    #[error("{a} is not a unit modulo {n}")]
    NotCoprime { a: u64, n: u64 },
    #[error("elements of Z[zeta_{0}] and Z[zeta_{1}] cannot be combined")]
    RingMismatch(u64, u64),
}

fn check_cap(n: u64, cfg: &OracleConfig) -> Result<(), OracleError> {
    if n == 0 || euler_phi_u64(n) > cfg.phi_cap {
        return Err(OracleError::CapExceeded { n: n.into(), cap: cfg.phi_cap });
    }
    Ok(())
}

/// `Phi_n`, by dividing `x^n - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic_poly(n: u64, cfg: &OracleConfig) -> Result<IntPoly, OracleError> {
    check_cap(n, cfg)?;
    Ok(cyclotomic_unchecked(n))
}

fn cyclotomic_unchecked(n: u64) -> IntPoly {
    let divs = divisors_u64(n);
    let mut phis: BTreeMap<u64, IntPoly> = BTreeMap::new();
    for &d in &divs {
        let mut p = IntPoly::x_pow_minus_one(d as usize);
        for (&e, phi_e) in &phis {
            if d % e == 0 {
                let (q, r) = p.div_rem_monic(phi_e);
                debug_assert!(r.is_zero());
                p = q;
            }
        }
        phis.insert(d, p);
    }
    phis.remove(&n).expect("n divides itself")
}

/// The ring `Z[x]/Phi_n` with the powers `x^k mod Phi_n`, `0 <= k < n`,
/// precomputed.
#[derive(Clone, Debug)]
pub struct CyclotomicRing {
    n: u64,
    phi: IntPoly,
    powers: Vec<Vec<BigInt>>,
    coeff_bits: u64,
}

impl CyclotomicRing {
    pub fn new(n: u64, cfg: &OracleConfig) -> Result<Self, OracleError> {
        let phi = cyclotomic_poly(n, cfg)?;
        let deg = phi.degree().expect("nonzero");
        let mut powers = Vec::with_capacity(n as usize);
        let mut cur = vec![BigInt::zero(); deg];
        cur[0] = 1.into();
        for _ in 0..n {
            powers.push(cur.clone());
            // multiply by x and reduce with the monic Phi_n
            let top = cur.pop().expect("deg >= 1");
            cur.insert(0, BigInt::zero());
            if !top.is_zero() {
                for (k, c) in phi.coeffs()[..deg].iter().enumerate() {
                    cur[k] -= &top * c;
                }
            }
        }
        Ok(CyclotomicRing { n, phi, powers, coeff_bits: cfg.coeff_bits })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn modulus(&self) -> &IntPoly {
        &self.phi
    }

    /// `phi(n)`, the length of every element's coefficient vector.
    pub fn dim(&self) -> usize {
        self.phi.coeffs().len() - 1
    }

    pub fn zero(&self) -> CycloElem {
        CycloElem { n: self.n, coeffs: vec![BigInt::zero(); self.dim()] }
    }

    pub fn constant(&self, c: impl Into<BigInt>) -> CycloElem {
        let mut e = self.zero();
        e.coeffs[0] = c.into();
        e
    }

    /// `zeta_n^e`.
    pub fn zeta_pow(&self, e: &BigUint) -> CycloElem {
        let k = (e % self.n).to_usize().expect("below n");
        CycloElem { n: self.n, coeffs: self.powers[k].clone() }
    }

    /// Canonical residue of `poly` modulo `Phi_n`.
    pub fn reduce(&self, poly: &IntPoly) -> CycloElem {
        let mut out = self.zero();
        for (k, c) in poly.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &self.powers[k % self.n as usize];
            for (o, r) in out.coeffs.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o += c * r;
                }
            }
        }
        out
    }

    fn same_ring(&self, e: &CycloElem) -> Result<(), OracleError> {
        if e.n != self.n {
            return Err(OracleError::RingMismatch(self.n, e.n));
        }
        Ok(())
    }

    fn check_size(&self, e: &CycloElem) -> Result<(), OracleError> {
        let bits = e.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0);
        if bits > self.coeff_bits {
            return Err(OracleError::CoefficientOverflow { bits, bound: self.coeff_bits });
        }
        Ok(())
    }

    pub fn add(&self, a: &CycloElem, b: &CycloElem) -> Result<CycloElem, OracleError> {
        self.same_ring(a)?;
        self.same_ring(b)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Ok(CycloElem { n: self.n, coeffs })
    }

    pub fn mul(&self, a: &CycloElem, b: &CycloElem) -> Result<CycloElem, OracleError> {
        self.same_ring(a)?;
        self.same_ring(b)?;
        let prod = IntPoly::new(a.coeffs.clone()).mul(&IntPoly::new(b.coeffs.clone()));
        let out = self.reduce(&prod);
        self.check_size(&out)?;
        Ok(out)
    }

    /// Image under the automorphism `zeta_n -> zeta_n^a`.
    pub fn conjugate(&self, elem: &CycloElem, a: u64) -> Result<CycloElem, OracleError> {
        self.same_ring(elem)?;
        if gcd_u64(a % self.n, self.n) != 1 {
            return Err(OracleError::NotCoprime { a, n: self.n });
        }
        let mut spread = vec![BigInt::zero(); self.n as usize];
        for (k, c) in elem.coeffs.iter().enumerate() {
            let idx = ((k as u128 * a as u128) % self.n as u128) as usize;
            spread[idx] += c;
        }
        Ok(self.reduce(&IntPoly::new(spread)))
    }

    /// `N(elem)`, the product of all conjugates, as the resultant of
    /// `Phi_n` and the representative polynomial.
    pub fn norm(&self, elem: &CycloElem) -> Result<BigInt, OracleError> {
        self.same_ring(elem)?;
        Ok(resultant(&self.phi, &IntPoly::new(elem.coeffs.clone())))
    }

    /// Matrix of multiplication by `elem` on the power basis; its
    /// determinant is the norm as well.
    pub fn multiplication_matrix(&self, elem: &CycloElem) -> Vec<Vec<BigInt>> {
        let d = self.dim();
        (0..d)
            .map(|k| {
                let shifted = IntPoly::new(elem.coeffs.clone()).mul(&IntPoly::monomial(1.into(), k));
                self.reduce(&shifted).coeffs
            })
            .collect()
    }
}

/// An element of `Z[zeta_n]` in the power basis `1, zeta, ..., zeta^{phi(n)-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloElem {
    n: u64,
    coeffs: Vec<BigInt>,
}

impl CycloElem {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Floating-point value at `zeta_n^a`, for diagnostics.
    pub fn to_complex_f64(&self, a: u64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let c = c.to_f64().unwrap_or(f64::NAN);
            let t = 2.0 * std::f64::consts::PI * ((k as u128 * a as u128) % self.n as u128) as f64 / self.n as f64;
            re += c * t.cos();
            im += c * t.sin();
        }
        (re, im)
    }
}

struct Exact<'a> {
    ring: &'a CyclotomicRing,
}

impl CircuitEvaluator for Exact<'_> {
    type Value = CycloElem;
    type Error = OracleError;

    fn input(&mut self, e: &BigUint) -> Result<CycloElem, OracleError> {
        Ok(self.ring.zeta_pow(e))
    }

    fn sum(&mut self, terms: &[(&BigInt, &CycloElem)]) -> Result<CycloElem, OracleError> {
        let mut acc = self.ring.zero();
        for (w, v) in terms {
            if w.is_zero() {
                continue;
            }
            for (o, c) in acc.coeffs.iter_mut().zip(&v.coeffs) {
                *o += *w * c;
            }
        }
        self.ring.check_size(&acc)?;
        Ok(acc)
    }

    fn product(&mut self, factors: &[&CycloElem]) -> Result<CycloElem, OracleError> {
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = self.ring.mul(&acc, f)?;
        }
        Ok(acc)
    }
}

/// Exact `f(zeta_n)`.
pub fn eval_circuit_exact(circuit: &Circuit, ring: &CyclotomicRing) -> Result<CycloElem, OracleError> {
    circuit.evaluate(&mut Exact { ring })
}

/// `f(zeta_n^a)` for every unit `a` modulo `n`. Because `f` has integer
/// coefficients these are the conjugates of `f(zeta_n)`.
pub fn all_conjugate_values(
    circuit: &Circuit,
    ring: &CyclotomicRing,
) -> Result<BTreeMap<u64, CycloElem>, OracleError> {
    let value = eval_circuit_exact(circuit, ring)?;
    let n = ring.n();
    let mut out = BTreeMap::new();
    for a in (1..=n).filter(|&a| gcd_u64(a % n, n) == 1) {
        out.insert(a % n, ring.conjugate(&value, a)?);
    }
    Ok(out)
}

/// Convenience entry point: ring construction plus evaluation.
pub fn is_zero_at_root_of_unity(circuit: &Circuit, n: &BigUint, cfg: &OracleConfig) -> Result<bool, OracleError> {
    let small = n
        .to_u64()
        .ok_or_else(|| OracleError::CapExceeded { n: n.clone(), cap: cfg.phi_cap })?;
    let ring = CyclotomicRing::new(small, cfg)?;
    Ok(eval_circuit_exact(circuit, &ring)?.is_zero())
}
