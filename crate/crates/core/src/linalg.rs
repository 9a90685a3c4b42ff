//! Exact linear algebra over `Q`, carried out on primitive integer rows with
//! fraction-free elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("dimension mismatch: {0} vs {1}")]
pub struct DimensionMismatch(pub usize, pub usize);

/// Divides out the content and makes the first nonzero entry positive.
fn primitive(mut row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return row;
    }
    let flip = row.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative);
    for x in &mut row {
        *x /= &g;
        if flip {
            *x = -&*x;
        }
    }
    row
}

/// Clears denominators of a rational vector.
pub fn integerise(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    primitive(v.iter().map(|x| x.numer() * (&l / x.denom())).collect())
}

/// Reduced row echelon form of integer rows: each pivot column is zero
/// outside its pivot row. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<BigInt>], width: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| primitive(r.clone())).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        if r == m.len() {
            break;
        }
        // partial pivoting: the smallest nonzero magnitude keeps entries small
        let Some(p) = (r..m.len())
            .filter(|&i| !m[i][col].is_zero())
            .min_by(|&a, &b| m[a][col].abs().cmp(&m[b][col].abs()))
        else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let g = m[r][col].gcd(&m[i][col]);
            let fr = &m[i][col] / &g;
            let fi = &m[r][col] / &g;
            let pivot_row = m[r].clone();
            let row: Vec<BigInt> = m[i].iter().zip(&pivot_row).map(|(x, y)| x * &fi - y * &fr).collect();
            m[i] = primitive(row);
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<BigInt>], width: usize) -> usize {
    rref(rows, width).1.len()
}

/// Basis of `{x : A x = 0}` as primitive integer vectors.
pub fn kernel(rows: &[Vec<BigInt>], width: usize) -> Vec<Vec<BigInt>> {
    let (m, pivots) = rref(rows, width);
    let mut is_pivot = vec![false; width];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..width).filter(|&c| !is_pivot[c]) {
        let mut v = vec![BigRational::zero(); width];
        v[free] = BigRational::one();
        for (row, &p) in m.iter().zip(&pivots) {
            v[p] = -BigRational::new(row[free].clone(), row[p].clone());
        }
        out.push(integerise(&v));
    }
    out
}

/// A subspace of `Q^d`, held as a basis of primitive integer vectors in
/// reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSubspace {
    ambient_dim: usize,
    basis: Vec<Vec<BigInt>>,
}

impl RationalSubspace {
    /// Span of `vectors`, reduced to an independent set.
    pub fn span(ambient_dim: usize, vectors: &[Vec<BigInt>]) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == ambient_dim));
        let (basis, _) = rref(vectors, ambient_dim);
        RationalSubspace { ambient_dim, basis }
    }

    pub fn span_rational(ambient_dim: usize, vectors: &[Vec<BigRational>]) -> Self {
        let ints: Vec<_> = vectors.iter().map(|v| integerise(v)).collect();
        Self::span(ambient_dim, &ints)
    }

    pub fn zero(ambient_dim: usize) -> Self {
        RationalSubspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| (0..ambient_dim).map(|j| BigInt::from(u8::from(i == j))).collect())
            .collect();
        RationalSubspace { ambient_dim, basis }
    }

    /// `{x : A x = 0}`.
    pub fn kernel_of(rows: &[Vec<BigInt>], ambient_dim: usize) -> Self {
        RationalSubspace { ambient_dim, basis: kernel(rows, ambient_dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&rows, self.ambient_dim) == self.dim()
    }

    /// Same subspace, regardless of basis.
    pub fn equivalent(&self, other: &RationalSubspace) -> bool {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        rank(&rows, self.ambient_dim) == self.dim()
    }

    pub fn orth_complement(&self) -> RationalSubspace {
        Self::kernel_of(&self.basis, self.ambient_dim)
    }

    /// Span of all coordinatewise products `u * v`.
    pub fn hadamard(&self, other: &RationalSubspace) -> Result<RationalSubspace, DimensionMismatch> {
        if self.ambient_dim != other.ambient_dim {
            return Err(DimensionMismatch(self.ambient_dim, other.ambient_dim));
        }
        let d = self.ambient_dim;
        // reduce incrementally so the candidate list never exceeds d rows
        let mut acc: Vec<Vec<BigInt>> = Vec::new();
        for u in &self.basis {
            for v in &other.basis {
                acc.push(u.iter().zip(v).map(|(x, y)| x * y).collect());
                if acc.len() > d {
                    acc = rref(&acc, d).0;
                }
            }
        }
        Ok(Self::span(d, &acc))
    }

    /// `{a in Q^s : T a in self}` for a `t x s` matrix `T`.
    pub fn preimage(&self, t_rows: &[Vec<BigInt>], s: usize) -> RationalSubspace {
        let constraints = self.orth_complement();
        let rows: Vec<Vec<BigInt>> = constraints
            .basis
            .iter()
            .map(|c| {
                (0..s)
                    .map(|j| c.iter().zip(t_rows).map(|(ci, row)| ci * &row[j]).sum())
                    .collect()
            })
            .collect();
        Self::kernel_of(&rows, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn complement_of_all_ones() {
        let u = RationalSubspace::span(3, &[v(&[1, 1, 1])]);
        let c = u.orth_complement();
        assert_eq!(c.dim(), 2);
        for b in c.basis() {
            assert_eq!(b.iter().sum::<BigInt>(), BigInt::zero());
        }
        assert!(c.orth_complement().equivalent(&u));
        assert!(RationalSubspace::zero(4).orth_complement().equivalent(&RationalSubspace::full(4)));
    }

    #[test]
    fn hadamard_examples() {
        let u = RationalSubspace::span(3, &[v(&[1, -1, 1])]);
        let w = RationalSubspace::span(3, &[v(&[1, -1, 0]), v(&[0, 1, -1])]);
        let expected = RationalSubspace::span(3, &[v(&[1, 1, 0]), v(&[0, -1, -1])]);
        assert!(u.hadamard(&w).unwrap().equivalent(&expected));
        let ones = RationalSubspace::span(3, &[v(&[1, 1, 1])]);
        assert!(w.hadamard(&ones).unwrap().equivalent(&w));
        assert_eq!(w.hadamard(&RationalSubspace::zero(3)).unwrap().dim(), 0);
        assert!(w.hadamard(&RationalSubspace::zero(4)).is_err());
    }

    #[test]
    fn preimage_of_summation() {
        // T sums coordinates {0, 2} and {1}; preimage of span{(1, 1)}
        let t = vec![v(&[1, 0, 1]), v(&[0, 1, 0])];
        let w = RationalSubspace::span(2, &[v(&[1, 1])]);
        let pre = w.preimage(&t, 3);
        assert_eq!(pre.dim(), 2);
        assert!(pre.contains(&v(&[1, 2, 1])));
        assert!(!pre.contains(&v(&[1, 1, 1])));
    }

    fn arb_rows() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-4i64..5, d), 0..6))
    }

    proptest! {
        #[test]
        fn dimensions_add_up(rows in arb_rows()) {
            let d = rows.first().map_or(3, Vec::len);
            let ints: Vec<_> = rows.iter().map(|r| v(r)).collect();
            let u = RationalSubspace::span(d, &ints);
            let c = u.orth_complement();
            prop_assert_eq!(u.dim() + c.dim(), d);
            for a in u.basis() {
                for b in c.basis() {
                    prop_assert_eq!(a.iter().zip(b).map(|(x, y)| x * y).sum::<BigInt>(), BigInt::zero());
                }
            }
            prop_assert!(c.orth_complement().equivalent(&u));
            for r in &ints {
                prop_assert!(u.contains(r));
            }
        }

        #[test]
        fn hadamard_commutes_and_associates(a in arb_rows(), b in arb_rows(), c in arb_rows()) {
            let d = 4;
            let fit = |rows: &Vec<Vec<i64>>| {
                let ints: Vec<_> = rows.iter().map(|r| {
                    let mut r = r.clone();
                    r.resize(d, 1);
                    v(&r)
                }).collect();
                RationalSubspace::span(d, &ints)
            };
            let (u, w, x) = (fit(&a), fit(&b), fit(&c));
            prop_assert!(u.hadamard(&w).unwrap().equivalent(&w.hadamard(&u).unwrap()));
            let left = u.hadamard(&w).unwrap().hadamard(&x).unwrap();
            let right = u.hadamard(&w.hadamard(&x).unwrap()).unwrap();
            prop_assert!(left.equivalent(&right));
        }
    }
}
