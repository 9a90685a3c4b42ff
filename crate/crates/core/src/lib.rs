//! Cyclotomic identity testing: deciding whether an algebraic circuit with
//! high-powered monomial leaves vanishes at a primitive `n`-th root of unity.
//!
//! Engines:
//! - [`oracle`]: exact arithmetic in `Z[x]/Phi_n` for small `n`.
//! - [`ff`]: Monte Carlo evaluation in `F_p` at a sampled root of unity.
//! - [`numeric`]: ball-arithmetic evaluation at a random Galois conjugate.
//! - [`sparse_cit`]: exact vanishing-space test for sparse polynomials.
//! - [`diagonal`]: orbit-based test for sums of powers of a sparse polynomial.
//! - [`slp`]: equality of grammar-compressed strings.

pub mod circuit;
pub mod diagonal;
pub mod ff;
pub mod linalg;
pub mod nt;
pub mod numeric;
pub mod oracle;
pub mod slp;
pub mod sparse_cit;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of a zeroness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Zero,
    NonZero,
    /// Too few trials produced a usable answer.
    Inconclusive,
}

/// The RNG for trial `index` of a run seeded with `seed`. Streams for
/// distinct indices do not overlap.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Serializes a big integer as a decimal string.
pub(crate) fn serde_decimal<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Majority vote. Inconclusive when most trials were inconclusive or the
/// conclusive ones tie.
pub fn majority(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let (mut zero, mut nonzero, mut total) = (0usize, 0usize, 0usize);
    for v in verdicts {
        total += 1;
        match v {
            Verdict::Zero => zero += 1,
            Verdict::NonZero => nonzero += 1,
            Verdict::Inconclusive => {}
        }
    }
    if 2 * (zero + nonzero) <= total || zero == nonzero {
        Verdict::Inconclusive
    } else if zero > nonzero {
        Verdict::Zero
    } else {
        Verdict::NonZero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;
    use Verdict::*;

    #[test]
    fn majority_rules() {
        assert_eq!(majority([Zero, Zero, NonZero]), Zero);
        assert_eq!(majority([NonZero, Inconclusive, NonZero, Zero]), NonZero);
        assert_eq!(majority([Zero, NonZero]), Inconclusive);
        assert_eq!(majority([Zero, Inconclusive, Inconclusive]), Inconclusive);
        assert_eq!(majority([]), Inconclusive);
    }

    #[test]
    fn trial_streams_differ_and_replay() {
        let a = trial_rng(7, 0).next_u64();
        assert_eq!(a, trial_rng(7, 0).next_u64());
        assert_ne!(a, trial_rng(7, 1).next_u64());
        assert_ne!(a, trial_rng(8, 0).next_u64());
    }
}
