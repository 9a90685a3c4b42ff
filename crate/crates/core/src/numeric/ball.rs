use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `mant * 2^exp`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

/// Significant bits kept in radii.
const RADIUS_BITS: u64 = 62;

impl Dyadic {
    pub fn new(mant: impl Into<BigInt>, exp: i64) -> Self {
        Dyadic { mant: mant.into(), exp }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Dyadic { mant: v.into(), exp: 0 }
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    /// Multiplication by `2^k`.
    pub fn ldexp(&self, k: i64) -> Self {
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// `floor(log2 |x|) + 1`, i.e. `|x| < 2^top_bit`; `None` for zero.
    pub fn top_bit(&self) -> Option<i64> {
        if self.mant.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 + self.exp)
        }
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        ((&a.mant << (a.exp - e) as u64), (&b.mant << (b.exp - e) as u64), e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let (a, b, e) = Self::aligned(self, other);
        Dyadic { mant: a + b, exp: e }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { mant: &self.mant * &other.mant, exp: self.exp + other.exp }
    }

    pub fn mul_int(&self, w: &BigInt) -> Dyadic {
        Dyadic { mant: &self.mant * w, exp: self.exp }
    }

    /// Rounds toward minus infinity to a multiple of `2^-prec`. The error is
    /// below `2^-prec`; returns whether anything was discarded.
    pub fn floor_to(&self, prec: i64) -> (Dyadic, bool) {
        let target = -prec;
        if self.exp >= target {
            return (self.clone(), false);
        }
        let shift = (target - self.exp) as u64;
        // BigInt >> rounds toward minus infinity
        let mant = &self.mant >> shift;
        let exact = &mant << shift == self.mant;
        (Dyadic { mant, exp: target }, !exact)
    }

    /// Smallest value `>= self` (assumed non-negative) with at most `bits`
    /// significant bits.
    pub fn round_up_sig(&self, bits: u64) -> Dyadic {
        let len = self.mant.bits();
        if len <= bits {
            return self.clone();
        }
        let shift = len - bits;
        let mant = (&self.mant >> shift) + 1u32;
        Dyadic { mant, exp: self.exp + shift as i64 }
    }

    /// Exact comparison.
    pub fn cmp_value(&self, other: &Dyadic) -> Ordering {
        let (a, b, _) = Self::aligned(self, other);
        a.cmp(&b)
    }

    /// Compares `|self|` with `2^k`.
    pub fn cmp_abs_pow2(&self, k: i64) -> Ordering {
        self.abs().cmp_value(&Dyadic::pow2(k))
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 60).max(0);
        let top = (&self.mant >> drop as u64).to_f64().unwrap_or(0.0);
        top * 2f64.powi((self.exp + drop).clamp(-1100, 1100) as i32)
    }
}

/// A complex disc: midpoint `re + i*im` and radius `rad`. The represented
/// value lies within `rad` of the midpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallComplex {
    pub re: Dyadic,
    pub im: Dyadic,
    pub rad: Dyadic,
}

impl BallComplex {
    pub fn exact(re: Dyadic, im: Dyadic) -> Self {
        BallComplex { re, im, rad: Dyadic::zero() }
    }

    pub fn zero() -> Self {
        Self::exact(Dyadic::zero(), Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::exact(Dyadic::from_int(1), Dyadic::zero())
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Self::exact(Dyadic::from_int(v), Dyadic::zero())
    }

    pub fn with_radius(mut self, rad: Dyadic) -> Self {
        self.rad = rad.round_up_sig(RADIUS_BITS);
        self
    }

    /// Adds `extra` to the radius.
    pub fn inflate(mut self, extra: &Dyadic) -> Self {
        self.rad = self.rad.add(extra).round_up_sig(RADIUS_BITS);
        self
    }

    pub fn add(&self, other: &BallComplex) -> BallComplex {
        BallComplex {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
            rad: self.rad.add(&other.rad).round_up_sig(RADIUS_BITS),
        }
    }

    pub fn neg(&self) -> BallComplex {
        BallComplex { re: self.re.neg(), im: self.im.neg(), rad: self.rad.clone() }
    }

    pub fn sub(&self, other: &BallComplex) -> BallComplex {
        self.add(&other.neg())
    }

    pub fn scale_int(&self, w: &BigInt) -> BallComplex {
        BallComplex {
            re: self.re.mul_int(w),
            im: self.im.mul_int(w),
            rad: self.rad.mul_int(&w.abs()).round_up_sig(RADIUS_BITS),
        }
    }

    /// Upper bound on `|mid|` with about 64 significant bits.
    pub fn mid_abs_upper(&self) -> Dyadic {
        let top = match (self.re.top_bit(), self.im.top_bit()) {
            (None, None) => return Dyadic::zero(),
            (a, b) => a.max(b).expect("one is nonzero"),
        };
        let k = top - 64;
        let ceil_abs = |x: &Dyadic| -> BigUint {
            let (f, inexact) = x.abs().floor_to(-k);
            let m = f.mant.magnitude() << (f.exp - k).max(0) as u64;
            if inexact {
                m + 1u32
            } else {
                m
            }
        };
        let (r, i) = (ceil_abs(&self.re), ceil_abs(&self.im));
        let sq = &r * &r + &i * &i;
        let mut root = sq.sqrt();
        if &root * &root < sq {
            root += 1u32;
        }
        Dyadic { mant: BigInt::from_biguint(Sign::Plus, root), exp: k }
    }

    /// Upper bound on `|mid| + rad`.
    pub fn abs_upper(&self) -> Dyadic {
        self.mid_abs_upper().add(&self.rad)
    }

    /// Product with midpoints rounded to multiples of `2^-prec`.
    pub fn mul(&self, other: &BallComplex, prec: i64) -> BallComplex {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        let mut rad = Dyadic::zero();
        if !other.rad.is_zero() {
            rad = rad.add(&self.mid_abs_upper().mul(&other.rad));
        }
        if !self.rad.is_zero() {
            rad = rad.add(&other.mid_abs_upper().mul(&self.rad)).add(&self.rad.mul(&other.rad));
        }
        BallComplex { re, im, rad: rad.round_up_sig(RADIUS_BITS) }.round(prec)
    }

    /// Rounds both midpoint parts to multiples of `2^-prec`, growing the
    /// radius by `2^{1-prec}` when something was discarded.
    pub fn round(self, prec: i64) -> BallComplex {
        let (re, a) = self.re.floor_to(prec);
        let (im, b) = self.im.floor_to(prec);
        let ball = BallComplex { re, im, rad: self.rad };
        if a || b {
            ball.inflate(&Dyadic::pow2(1 - prec))
        } else {
            ball
        }
    }

    /// `|mid| < 2^k`, decided exactly.
    pub fn mid_abs_below(&self, k: i64) -> bool {
        let sq = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        sq.cmp_value(&Dyadic::pow2(2 * k)) == Ordering::Less
    }

    /// `rad < 2^k`.
    pub fn rad_below(&self, k: i64) -> bool {
        self.rad.cmp_value(&Dyadic::pow2(k)) == Ordering::Less
    }

    /// `floor(log2 rad)`-ish diagnostic; `None` for exact balls.
    pub fn rad_log2(&self) -> Option<i64> {
        self.rad.top_bit()
    }

    /// True if `z` (given in floating point) is within the ball, allowing
    /// `slack` for the floating-point error of `z`.
    pub fn contains_f64(&self, z: (f64, f64), slack: f64) -> bool {
        let dr = self.re.to_f64() - z.0;
        let di = self.im.to_f64() - z.1;
        (dr * dr + di * di).sqrt() <= self.rad.to_f64() + slack
    }

    /// True if every point of `other` lies within this ball.
    pub fn contains_ball(&self, other: &BallComplex) -> bool {
        let diff = BallComplex::exact(self.re.sub(&other.re), self.im.sub(&other.im));
        diff.mid_abs_upper().add(&other.rad).cmp_value(&self.rad) != Ordering::Greater
    }

    /// True if the balls may share a point.
    pub fn overlaps(&self, other: &BallComplex) -> bool {
        let diff = BallComplex::exact(self.re.sub(&other.re), self.im.sub(&other.im));
        let reach = self.rad.add(&other.rad);
        let sq = diff.re.mul(&diff.re).add(&diff.im.mul(&diff.im));
        sq.cmp_value(&reach.mul(&reach)) != Ordering::Greater
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
