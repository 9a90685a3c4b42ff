use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Dense integer polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(vec![BigInt::one()])
    }

    /// `c * x^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `x^k - 1`.
    pub fn x_pow_minus_one(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[0] = -BigInt::one();
        coeffs[k] += BigInt::one();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::new(out)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &IntPoly) -> (IntPoly, IntPoly) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let m = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= m {
            return (IntPoly::zero(), IntPoly::new(rem));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - m];
        for top in (m..rem.len()).rev() {
            let c = std::mem::take(&mut rem[top]);
            if c.is_zero() {
                continue;
            }
            for (k, d) in divisor.coeffs[..m].iter().enumerate() {
                if !d.is_zero() {
                    rem[top - m + k] -= &c * d;
                }
            }
            quot[top - m] = c;
        }
        rem.truncate(m);
        (IntPoly::new(quot), IntPoly::new(rem))
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination.
pub fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Resultant of `f` and `g` as the determinant of their Sylvester matrix.
pub fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let (Some(m), Some(k)) = (f.degree(), g.degree()) else {
        return BigInt::zero();
    };
    let size = m + k;
    if size == 0 {
        return BigInt::one();
    }
    let mut rows = Vec::with_capacity(size);
    // coefficient of x^{size-1-col}
    let place = |p: &IntPoly, shift: usize| {
        let deg = p.coeffs.len() - 1;
        let mut row = vec![BigInt::zero(); size];
        for (i, c) in p.coeffs.iter().enumerate() {
            row[shift + deg - i] = c.clone();
        }
        row
    };
    for shift in 0..k {
        rows.push(place(f, shift));
    }
    for shift in 0..m {
        rows.push(place(g, shift));
    }
    det_bareiss(rows)
}
