//! Miller-Rabin primality testing, randomised and deterministic.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

/// Bases that make Miller-Rabin exact below [`deterministic_limit`].
pub const DETERMINISTIC_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// 3317044064679887385961981: the least strong pseudoprime to all of
/// [`DETERMINISTIC_BASES`].
pub fn deterministic_limit() -> BigUint {
    BigUint::parse_bytes(b"3317044064679887385961981", 10).expect("literal")
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Outcome of trial division by the primes below 100.
enum Screen {
    Prime,
    Composite,
    Unknown,
}

fn screen(q: &BigUint) -> Screen {
    if let Some(v) = q.to_u64() {
        if v < 2 {
            return Screen::Composite;
        }
        for &p in &SMALL_PRIMES {
            let p = u64::from(p);
            if v == p {
                return Screen::Prime;
            }
            if v % p == 0 {
                return Screen::Composite;
            }
        }
        if v < 97 * 97 {
            return Screen::Prime;
        }
        return Screen::Unknown;
    }
    for &p in &SMALL_PRIMES {
        if (q % p).is_zero() {
            return Screen::Composite;
        }
    }
    Screen::Unknown
}

/// One strong-probable-prime round. `d` odd with `q - 1 = d * 2^r`.
fn strong_round(q: &BigUint, q_minus_1: &BigUint, d: &BigUint, r: u64, base: &BigUint) -> bool {
    let mut x = base.modpow(d, q);
    if x.is_one() || &x == q_minus_1 {
        return true;
    }
    for _ in 1..r {
        x = (&x * &x) % q;
        if &x == q_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

fn decompose(q: &BigUint) -> (BigUint, BigUint, u64) {
    let q_minus_1 = q - 1u32;
    let r = q_minus_1.trailing_zeros().unwrap_or(0);
    let d = &q_minus_1 >> r;
    (q_minus_1, d, r)
}

/// Randomised Miller-Rabin with `rounds` uniformly drawn bases.
///
/// A `false` answer is always correct; a `true` answer is wrong with
/// probability at most `4^-rounds`.
pub fn miller_rabin<R: Rng + ?Sized>(q: &BigUint, rounds: u32, rng: &mut R) -> bool {
    match screen(q) {
        Screen::Prime => return true,
        Screen::Composite => return false,
        Screen::Unknown => {}
    }
    let (q_minus_1, d, r) = decompose(q);
    let two = BigUint::from(2u32);
    for _ in 0..rounds {
        let base = rng.gen_biguint_range(&two, &q_minus_1);
        if !strong_round(q, &q_minus_1, &d, r, &base) {
            return false;
        }
    }
    true
}

/// Exact primality for `q` below [`deterministic_limit`]; `None` above it.
pub fn is_prime_deterministic(q: &BigUint) -> Option<bool> {
    match screen(q) {
        Screen::Prime => return Some(true),
        Screen::Composite => return Some(false),
        Screen::Unknown => {}
    }
    if q >= &deterministic_limit() {
        return None;
    }
    let (q_minus_1, d, r) = decompose(q);
    Some(
        DETERMINISTIC_BASES
            .iter()
            .all(|&b| strong_round(q, &q_minus_1, &d, r, &BigUint::from(b))),
    )
}
