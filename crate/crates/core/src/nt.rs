//! Elementary number theory on arbitrary-precision integers: bit lengths,
//! small-prime sieving, partial and full factorisation, Euler's totient.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ff::primality::is_prime_deterministic;

/// Bit length used by every size computation in the crate.
///
/// `0`, `1` and `-1` take one bit. Otherwise the magnitude takes
/// `floor(log2 |k|) + 1` bits and negative values pay one extra sign bit.
pub fn bit_size(k: &BigInt) -> u64 {
    let mag = k.magnitude();
    if mag <= &BigUint::one() {
        return 1;
    }
    mag.bits() + u64::from(k.is_negative())
}

/// [`bit_size`] for a non-negative integer.
pub fn bit_size_unsigned(k: &BigUint) -> u64 {
    if k <= &BigUint::one() {
        1
    } else {
        k.bits()
    }
}

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Divides out every prime `p <= bound` from `n`.
///
/// Returns the `(p, e)` pairs found and the cofactor, which has no prime
/// factor `<= bound`.
pub fn trial_divide(n: &BigUint, bound: u64) -> (Vec<(u64, u32)>, BigUint) {
    let mut rest = n.clone();
    let mut found = Vec::new();
    if rest.is_zero() {
        return (found, rest);
    }
    for p in primes_up_to(bound) {
        let pb = BigUint::from(p);
        if &pb * &pb > rest && !rest.is_one() {
            // rest is 1 or a prime; only record it if it is small
            if let Some(r) = rest.to_u64() {
                if r <= bound {
                    found.push((r, 1));
                    rest = BigUint::one();
                }
            }
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            found.push((p, e));
        }
        if rest.is_one() {
            break;
        }
    }
    found.sort_unstable();
    (found, rest)
}

/// Brent's variant of Pollard's rho. Returns a non-trivial factor of the
/// composite `n`, or `None` when `budget` iterations are exhausted.
pub fn pollard_rho(n: &BigUint, budget: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let step = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const BATCH: u64 = 64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
                spent += BATCH;
                if spent > budget {
                    return None;
                }
            }
            r *= 2;
        }
        if &g == n {
            // backtrack one step at a time
            loop {
                ys = step(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
    }
    None
}

/// Complete factorisation by trial division up to `trial_bound` followed by
/// Pollard rho, each rho call limited to `rho_budget` iterations.
///
/// Returns `None` if some cofactor could not be split within budget or if a
/// cofactor is too large for deterministic primality testing.
pub fn factor(n: &BigUint, trial_bound: u64, rho_budget: u64) -> Option<Vec<(BigUint, u32)>> {
    let (small, rest) = trial_divide(n, trial_bound);
    let mut out: Vec<(BigUint, u32)> = small.into_iter().map(|(p, e)| (BigUint::from(p), e)).collect();
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() || m.is_zero() {
            continue;
        }
        if is_prime_deterministic(&m)? {
            out.push((m, 1));
            continue;
        }
        let d = pollard_rho(&m, rho_budget)?;
        let other = &m / &d;
        stack.push(d);
        stack.push(other);
    }
    out.sort();
    let mut merged: Vec<(BigUint, u32)> = Vec::with_capacity(out.len());
    for (p, e) in out {
        match merged.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => merged.push((p, e)),
        }
    }
    Some(merged)
}

/// Factorisation of a machine-word integer by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi_u64(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// All positive divisors of `n`, ascending.
pub fn divisors_u64(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Primes `q < bound` that divide `m`.
pub fn prime_divisors_below(m: &BigUint, bound: f64) -> Vec<u64> {
    if bound <= 2.0 {
        return Vec::new();
    }
    let largest = (bound.ceil() as u64).saturating_sub(1);
    primes_up_to(largest)
        .into_iter()
        .filter(|&q| (m % q).is_zero())
        .collect()
}

/// Approximate base-2 logarithm of a positive big integer.
pub fn log2_approx(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return n.to_u64().map_or(0.0, |v| (v as f64).log2());
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}
