//! Certificates of non-zeroness: a prime `p = 1 (mod n)`, the factorisation
//! of `p - 1`, and a generator `h` of `F_p^*` at whose `n`-th power root the
//! circuit does not vanish.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::primality::{deterministic_limit, is_prime_deterministic};
use super::{eval_circuit_mod, primitive_nth_root};
use crate::circuit::ProblemInstance;
use crate::nt::factor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonZeroCertificate {
    pub p: BigUint,
    pub factors: Vec<(BigUint, u32)>,
    pub h: BigUint,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    p: String,
    factors: Vec<[String; 2]>,
    h: String,
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("no certificate found with p <= {bound}")]
    NotFound { bound: BigUint },
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

impl NonZeroCertificate {
    pub fn to_json(&self) -> String {
        let wire = Wire {
            p: self.p.to_string(),
            factors: self.factors.iter().map(|(q, a)| [q.to_string(), a.to_string()]).collect(),
            h: self.h.to_string(),
        };
        serde_json::to_string(&wire).expect("plain strings serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CertificateError> {
        let wire: Wire = serde_json::from_str(text).map_err(|e| CertificateError::Malformed(e.to_string()))?;
        let num = |s: &str| {
            s.parse::<BigUint>()
                .map_err(|_| CertificateError::Malformed(format!("`{s}` is not a decimal integer")))
        };
        let factors = wire
            .factors
            .iter()
            .map(|[q, a]| {
                let a = a
                    .parse::<u32>()
                    .map_err(|_| CertificateError::Malformed(format!("bad multiplicity `{a}`")))?;
                Ok((num(q)?, a))
            })
            .collect::<Result<_, CertificateError>>()?;
        Ok(NonZeroCertificate { p: num(&wire.p)?, factors, h: num(&wire.h)? })
    }
}

#[derive(Clone, Debug)]
pub struct CertificateSearch {
    /// Largest `p` tried; `None` means `max(2^20, 64 n^2)`.
    pub p_bound: Option<BigUint>,
    pub trial_bound: u64,
    pub rho_budget: u64,
}

impl Default for CertificateSearch {
    fn default() -> Self {
        CertificateSearch { p_bound: None, trial_bound: 1 << 16, rho_budget: 1_000_000 }
    }
}

impl CertificateSearch {
    fn bound(&self, n: &BigUint) -> BigUint {
        let default = (BigUint::one() << 20u32).max(n * n * 64u32);
        let limit = deterministic_limit() - 1u32;
        self.p_bound.clone().unwrap_or(default).min(limit)
    }
}

/// Walks `p = 1 + k n` upwards and returns the first witness found.
pub fn make_certificate(
    instance: &ProblemInstance,
    search: &CertificateSearch,
) -> Result<NonZeroCertificate, CertificateError> {
    let n = &instance.n;
    let bound = search.bound(n);
    let mut p = n + 1u32;
    while p <= bound {
        if is_prime_deterministic(&p) == Some(true) {
            if let Some(cert) = try_prime(instance, &p, search) {
                return Ok(cert);
            }
        }
        p += n;
    }
    Err(CertificateError::NotFound { bound })
}

fn try_prime(instance: &ProblemInstance, p: &BigUint, search: &CertificateSearch) -> Option<NonZeroCertificate> {
    let factors = factor(&(p - 1u32), search.trial_bound, search.rho_budget)?;
    let mut h = BigUint::one();
    while !is_generator(p, &h, &factors) {
        h += 1u32;
        if &h >= p {
            return None;
        }
    }
    let omega = primitive_nth_root(p, &h, &instance.n)?;
    if eval_circuit_mod(&instance.circuit, p, &omega).is_zero() {
        return None;
    }
    Some(NonZeroCertificate { p: p.clone(), factors, h })
}

fn is_generator(p: &BigUint, h: &BigUint, factors: &[(BigUint, u32)]) -> bool {
    let pm1 = p - 1u32;
    factors.iter().all(|(q, _)| !h.modpow(&(&pm1 / q), p).is_one())
}

/// Deterministic check of every certificate condition, then of
/// `f(omega) != 0`. Never panics on adversarial input.
pub fn verify_certificate(instance: &ProblemInstance, cert: &NonZeroCertificate) -> bool {
    let p = &cert.p;
    let n = &instance.n;
    if n.is_zero() || p < &BigUint::from(2u32) {
        return false;
    }
    if is_prime_deterministic(p) != Some(true) {
        return false;
    }
    let pm1 = p - 1u32;
    if !(&pm1 % n).is_zero() {
        return false;
    }
    let mut product = BigUint::one();
    for (q, a) in &cert.factors {
        if *a == 0 || is_prime_deterministic(q) != Some(true) {
            return false;
        }
        product *= q.pow(*a);
        if product > pm1 {
            return false;
        }
    }
    if product != pm1 {
        return false;
    }
    if cert.h.is_zero() || &cert.h >= p || !is_generator(p, &cert.h, &cert.factors) {
        return false;
    }
    let omega = cert.h.modpow(&(&pm1 / n), p);
    !eval_circuit_mod(&instance.circuit, p, &omega).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sparse_circuit;

    fn inst(terms: &[(i64, u32)], n: u32) -> ProblemInstance {
        ProblemInstance::new(sparse_circuit(terms.iter().copied()), n)
    }

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn phi6_certificate() {
        let i = inst(&[(1, 0), (-1, 1), (1, 2)], 12);
        let cert = make_certificate(&i, &CertificateSearch::default()).unwrap();
        assert_eq!(cert, NonZeroCertificate { p: b(13), factors: vec![(b(2), 2), (b(3), 1)], h: b(2) });
        assert!(verify_certificate(&i, &cert));
        let bad_h = NonZeroCertificate { h: b(4), ..cert.clone() };
        assert!(!verify_certificate(&i, &bad_h));
        let missing = NonZeroCertificate { factors: vec![(b(2), 2)], ..cert.clone() };
        assert!(!verify_certificate(&i, &missing));
        let round = NonZeroCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(round, cert);
        assert_eq!(cert.to_json(), r#"{"p":"13","factors":[["2","2"],["3","1"]],"h":"2"}"#);
    }

    #[test]
    fn zero_instance_has_no_certificate() {
        let i = inst(&[(1, 0), (-1, 2), (1, 4)], 12);
        let search = CertificateSearch { p_bound: Some(b(20_000)), ..Default::default() };
        assert!(matches!(make_certificate(&i, &search), Err(CertificateError::NotFound { .. })));
    }

    #[test]
    fn constant_one() {
        let i = inst(&[(1, 0)], 2);
        let cert = make_certificate(&i, &CertificateSearch::default()).unwrap();
        assert!(verify_certificate(&i, &cert));
    }

    #[test]
    fn verifier_rejects_garbage() {
        let i = inst(&[(1, 0), (-1, 1), (1, 2)], 12);
        let cases = [
            NonZeroCertificate { p: b(12), factors: vec![(b(11), 1)], h: b(2) },
            NonZeroCertificate { p: b(13), factors: vec![(b(2), 2), (b(3), 1)], h: b(0) },
            NonZeroCertificate { p: b(13), factors: vec![(b(4), 1), (b(3), 1)], h: b(2) },
            NonZeroCertificate { p: b(13), factors: vec![(b(2), 2), (b(3), 0), (b(3), 1)], h: b(2) },
            NonZeroCertificate { p: b(37), factors: vec![(b(2), 2), (b(3), 1)], h: b(2) },
            NonZeroCertificate { p: deterministic_limit(), factors: vec![], h: b(2) },
        ];
        for c in &cases {
            assert!(!verify_certificate(&i, c), "{c:?}");
        }
        assert!(NonZeroCertificate::from_json(r#"{"p":"x","factors":[],"h":"2"}"#).is_err());
    }
}
