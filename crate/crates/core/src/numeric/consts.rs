use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::ball::{BallComplex, Dyadic};

/// `sum_k (-1)^k / ((2k+1) x^{2k+1})` in fixed point with scale `2^w`, plus
/// an error bound in units of `2^-w`.
fn arctan_inv(x: u64, w: u64) -> (BigInt, u64) {
    let x2 = BigInt::from(x * x);
    let mut power = (BigInt::one() << w) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    // each stored power is within 2 ulps, each term within 3; once the
    // power vanishes the alternating tail is below 2 ulps
    (sum, 3 * k + 2)
}

fn pi_uncached(bits: u64) -> BallComplex {
    // the accumulated error is about 11 w ulps
    let w = bits + 16 + u64::from(64 - bits.leading_zeros());
    let (a, ea) = arctan_inv(5, w);
    let (b, eb) = arctan_inv(239, w);
    let mid = a * 16 - b * 4;
    let err = 16 * ea + 4 * eb;
    BallComplex::exact(Dyadic::new(mid, -(w as i64)), Dyadic::zero())
        .with_radius(Dyadic::new(err, -(w as i64)))
}

fn pi_cache() -> &'static Mutex<Option<(u64, BallComplex)>> {
    static CACHE: OnceLock<Mutex<Option<(u64, BallComplex)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(None))
}

/// Real ball containing pi with radius at most `2^-bits`, from Machin's
/// formula `pi/4 = 4 arctan(1/5) - arctan(1/239)`.
pub fn approx_pi(bits: u64) -> BallComplex {
    let bits = bits.max(1);
    let mut guard = pi_cache().lock().unwrap_or_else(|e| e.into_inner());
    let ball = match &*guard {
        Some((have, ball)) if *have > bits => ball.clone(),
        _ => {
            let target = (bits + 1).max(64);
            let ball = pi_uncached(target);
            *guard = Some((target, ball.clone()));
            ball
        }
    };
    drop(guard);
    // trim to the requested precision; the rounding adds at most 2^{-bits-1}
    ball.round(bits as i64 + 2)
}

/// `e^{i phi}` for an exact dyadic `phi` with `0 <= phi < 8`, radius at most
/// `2^-bits`.
fn exp_i(phi: &Dyadic, bits: u64) -> BallComplex {
    let halvings = ((bits as f64).sqrt() as u64 / 2).max(4);
    let mut terms_guess = 4 * bits / halvings + 8;
    let mut wp = bits + 2 * halvings + 16;
    loop {
        let log_terms = 64 - terms_guess.leading_zeros() as u64;
        let prec = wp + log_terms;
        // fixed-point argument phi / 2^halvings, truncated
        let (arg, arg_inexact) = phi.ldexp(-(halvings as i64)).floor_to(prec as i64);
        let scale = BigInt::one() << prec;
        let arg_fixed = arg.mantissa() << (arg.exponent() + prec as i64).max(0) as u64;
        let (mut re, mut im) = (scale.clone(), BigInt::zero());
        let mut mag = scale.clone();
        let mut j = 0u64;
        loop {
            j += 1;
            mag = (&mag * &arg_fixed) / (&scale * BigInt::from(j));
            if mag.is_zero() {
                break;
            }
            match j % 4 {
                0 => re += &mag,
                1 => im += &mag,
                2 => re -= &mag,
                _ => im -= &mag,
            }
        }
        let per_component = 2 * j + 4;
        let mut z = BallComplex::exact(Dyadic::new(re, -(prec as i64)), Dyadic::new(im, -(prec as i64)))
            .with_radius(Dyadic::new(2 * per_component, -(prec as i64)));
        for _ in 0..halvings {
            z = z.mul(&z, prec as i64);
        }
        if arg_inexact {
            // |e^{ia} - e^{ib}| <= |a - b|
            z = z.inflate(&Dyadic::pow2(halvings as i64 - prec as i64));
        }
        if z.rad_below(-(bits as i64)) {
            return z;
        }
        terms_guess = terms_guess.max(j);
        wp += wp / 4 + 16;
    }
}

type RootKey = (BigUint, BigUint);

fn root_cache() -> &'static Mutex<HashMap<RootKey, (u64, BallComplex)>> {
    static CACHE: OnceLock<Mutex<HashMap<RootKey, (u64, BallComplex)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const ROOT_CACHE_LIMIT: usize = 1 << 15;
const ROOT_CACHE_MAX_BITS: u64 = 64;

/// Ball containing `zeta_n^ell = e^{2 pi i ell / n}` with radius at most
/// `2^-bits`. Quarter turns are exact.
pub fn approx_root_of_unity(n: &BigUint, ell: &BigUint, bits: u64) -> BallComplex {
    assert!(!n.is_zero(), "root-of-unity order must be positive");
    let ell = ell % n;
    if n.bits() > ROOT_CACHE_MAX_BITS && n.count_ones() == 1 {
        // huge power-of-two orders skip the gcd and the cache
        return approx_dyadic_turn(&ell, n.bits() - 1, bits);
    }
    let g = ell.gcd(n);
    let (num, den) = if ell.is_zero() { (BigUint::zero(), BigUint::one()) } else { (&ell / &g, n / &g) };
    if let Some(z) = quarter_turn(&num, &den) {
        return z;
    }
    let cacheable = den.bits() <= ROOT_CACHE_MAX_BITS;
    let key = (num, den);
    if cacheable {
        let cache = root_cache().lock().unwrap_or_else(|e| e.into_inner());
        if let Some((have, ball)) = cache.get(&key) {
            if *have >= bits + 2 {
                return ball.clone().round(bits as i64 + 2);
            }
        }
    }
    let ball = root_uncached(&key.0, &key.1, bits + 2);
    if cacheable {
        let mut cache = root_cache().lock().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= ROOT_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, (bits + 2, ball.clone()));
    }
    ball.round(bits as i64 + 2)
}

/// Exact value when `num/den` is a multiple of `1/4`.
fn quarter_turn(num: &BigUint, den: &BigUint) -> Option<BallComplex> {
    if !(BigUint::from(4u32) % den).is_zero() {
        return None;
    }
    let quarter = (num * 4u32 / den).to_u32_digits().first().copied().unwrap_or(0) % 4;
    let (re, im) = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter as usize];
    Some(BallComplex::exact(Dyadic::from_int(re), Dyadic::from_int(im)))
}

/// `e^{2 pi i num / 2^w}` for `num < 2^w`, radius at most `2^-bits`.
pub fn approx_dyadic_turn(num: &BigUint, w: u64, bits: u64) -> BallComplex {
    if w <= 2 || num.trailing_zeros().is_none_or(|tz| tz >= w - 2) {
        let quarters = if w >= 2 { num >> (w - 2) } else { num << (2 - w) };
        return quarter_turn(&quarters, &BigUint::from(4u32)).expect("multiple of a quarter");
    }
    let wp = bits + 8;
    // keeping wp bits of the turn loses less than 2^-wp
    let t_fixed = if w >= wp { num >> (w - wp) } else { num << (wp - w) };
    turn_ball(BigInt::from(t_fixed), bits)
}

/// `e^{2 pi i t}` with `t` known to within `2^-(bits+8)` as `t_fixed` scaled
/// by `2^(bits+8)`; radius at most `2^-bits`.
fn turn_ball(t_fixed: BigInt, bits: u64) -> BallComplex {
    let w = bits + 8;
    let pi = approx_pi(w + 4);
    // theta = 2 pi t, |theta| < 2 pi
    let theta = pi.re.mul(&Dyadic::new(t_fixed, 1 - w as i64));
    let (theta, _) = theta.floor_to(w as i64);
    // theta error: 2 pi 2^-w (t) + 2 * 2^{-w-4} (pi) + 2^-w (rounding) < 8 * 2^-w
    exp_i(&theta, bits + 1).inflate(&Dyadic::new(8, -(w as i64)))
}

/// Radius at most `2^-bits`.
fn root_uncached(num: &BigUint, den: &BigUint, bits: u64) -> BallComplex {
    // t = num/den truncated to bits + 8 bits
    turn_ball(BigInt::from((num << (bits + 8)) / den), bits)
}
