#![allow(dead_code)]

use std::collections::HashMap;

use cit_core::slp::{NodeId, Slp, SlpBuilder};
use rand::Rng;

/// Grammar builder with hash-consed pairs.
#[derive(Default)]
pub struct Grammar {
    b: SlpBuilder,
    memo: HashMap<(NodeId, NodeId), NodeId>,
}

impl Grammar {
    pub fn terminal(&mut self, c: char) -> NodeId {
        self.b.terminal(c)
    }

    pub fn pair(&mut self, l: NodeId, r: NodeId) -> NodeId {
        if let Some(&id) = self.memo.get(&(l, r)) {
            return id;
        }
        let id = self.b.pair(l, r);
        self.memo.insert((l, r), id);
        id
    }

    /// Concatenation of `parts`, folded left or right.
    pub fn concat(&mut self, parts: &[NodeId], left_fold: bool) -> NodeId {
        if left_fold {
            parts[1..].iter().fold(parts[0], |acc, &p| self.pair(acc, p))
        } else {
            parts[..parts.len() - 1].iter().rev().fold(parts[parts.len() - 1], |acc, &p| self.pair(p, acc))
        }
    }

    /// Balanced tree over the characters of `word`.
    pub fn word(&mut self, word: &[char]) -> NodeId {
        if word.len() == 1 {
            return self.terminal(word[0]);
        }
        let mid = word.len() / 2;
        let (l, r) = (self.word(&word[..mid]), self.word(&word[mid..]));
        self.pair(l, r)
    }

    /// Tree over `word` split at random positions.
    pub fn word_random(&mut self, word: &[char], rng: &mut impl Rng) -> NodeId {
        if word.len() == 1 {
            return self.terminal(word[0]);
        }
        let mid = rng.gen_range(1..word.len());
        let (l, r) = (self.word_random(&word[..mid], rng), self.word_random(&word[mid..], rng));
        self.pair(l, r)
    }

    /// `x^k` by square-and-multiply.
    pub fn power_binary(&mut self, x: NodeId, k: u64) -> NodeId {
        assert!(k >= 1);
        let mut acc: Option<NodeId> = None;
        let mut sq = x;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => sq,
                    Some(a) => self.pair(sq, a),
                });
            }
            k >>= 1;
            if k > 0 {
                sq = self.pair(sq, sq);
            }
        }
        acc.unwrap()
    }

    /// `x^k` as `x^{floor(k/2)} x^{ceil(k/2)}`.
    pub fn power_halving(&mut self, x: NodeId, k: u64) -> NodeId {
        let mut memo = HashMap::new();
        self.halving(x, k, &mut memo)
    }

    fn halving(&mut self, x: NodeId, k: u64, memo: &mut HashMap<u64, NodeId>) -> NodeId {
        if k == 1 {
            return x;
        }
        if let Some(&id) = memo.get(&k) {
            return id;
        }
        let l = self.halving(x, k / 2, memo);
        let r = self.halving(x, k - k / 2, memo);
        let id = self.pair(l, r);
        memo.insert(k, id);
        id
    }

    pub fn finish(self, start: NodeId) -> Slp {
        self.b.finish(start).unwrap()
    }
}

pub fn random_word(rng: &mut impl Rng, len: usize, alphabet: &[char]) -> Vec<char> {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// The word `u^k1 v w^k2`, built with one of two strategies.
pub fn periodic(u: &[char], k1: u64, v: &[char], w: &[char], k2: u64, variant: bool) -> Slp {
    let mut g = Grammar::default();
    let (un, vn, wn) = if variant {
        (g.word(u), g.word(v), g.word(w))
    } else {
        let mut rng = cit_core::trial_rng(k1 ^ k2, u.len() as u64);
        (g.word_random(u, &mut rng), g.word_random(v, &mut rng), g.word_random(w, &mut rng))
    };
    let (a, c) = if variant {
        (g.power_binary(un, k1), g.power_halving(wn, k2))
    } else {
        (g.power_halving(un, k1), g.power_binary(wn, k2))
    };
    let top = g.concat(&[a, vn, c], variant);
    g.finish(top)
}

/// A pair of grammars for one test case; ground truth is computed by the
/// caller.
pub struct SlpPair {
    pub left: Slp,
    pub right: Slp,
    pub label: String,
}

/// Pairs with words of length at most `10^6`. Even indices are built to be
/// equal, odd ones to differ in content.
pub fn short_pairs(count: usize, seed: u64) -> Vec<SlpPair> {
    let mut rng = cit_core::trial_rng(seed, 0);
    let abc = ['a', 'b', 'c'];
    (0..count)
        .map(|i| {
            let len = rng.gen_range(1..=6);
            let u = random_word(&mut rng, len, &abc);
            let len = rng.gen_range(1..=5);
            let v = random_word(&mut rng, len, &abc);
            let len = rng.gen_range(1..=6);
            let w = random_word(&mut rng, len, &abc);
            let k1 = rng.gen_range(1..=400_000 / u.len() as u64);
            let k2 = rng.gen_range(1..=400_000 / w.len() as u64);
            let left = periodic(&u, k1, &v, &w, k2, false);
            let (right, label) = if i % 2 == 0 {
                (periodic(&u, k1, &v, &w, k2, true), "same word, other shape")
            } else if i % 4 == 1 {
                let mut v2 = v.clone();
                let j = rng.gen_range(0..v2.len());
                v2[j] = if v2[j] == 'a' { 'b' } else { 'a' };
                (periodic(&u, k1, &v2, &w, k2, true), "one symbol changed")
            } else {
                // shift one copy of u from the left block to the right block
                let right = if k1 > 1 {
                    let mut g = Grammar::default();
                    let a = g.word(&u);
                    let a = g.power_binary(a, k1 - 1);
                    let b = g.word(&v);
                    let c = g.word(&u);
                    let d = g.word(&w);
                    let d = g.power_binary(d, k2);
                    let top = g.concat(&[a, b, c, d], true);
                    g.finish(top)
                } else {
                    periodic(&w, k2, &v, &u, k1, true)
                };
                (right, "rotated block")
            };
            SlpPair { left, right, label: format!("{i}: {label}") }
        })
        .collect()
}

/// Pairs with words of length about `2^40`, with known answers.
pub fn long_pairs() -> Vec<(SlpPair, bool)> {
    let mut out = Vec::new();
    let words: [&str; 5] = ["ab", "aab", "abba", "abc", "baaab"];
    for (i, u) in words.iter().enumerate() {
        let u: Vec<char> = u.chars().collect();
        let k = (1u64 << 40) / u.len() as u64;
        // u^k v == u^{k-1} (u v) as words
        let left = periodic(&u, k, &['c'], &['a'], 1, false);
        let mut g = Grammar::default();
        let un = g.word(&u);
        let p = g.power_halving(un, k - 1);
        let tail: Vec<char> = u.iter().copied().chain(['c', 'a']).collect();
        let t = g.word(&tail);
        let top = g.pair(p, t);
        out.push((SlpPair { left, right: g.finish(top), label: format!("long equal {i}") }, true));
        // u^k d a against u^k c a, with d outside the alphabet of u
        let left = periodic(&u, k, &['c'], &['a'], 1, true);
        let right = periodic(&u, k, &['d'], &['a'], 1, false);
        out.push((SlpPair { left, right, label: format!("long unequal {i}") }, false));
    }
    out
}

/// A random instance with `n <= 128` and circuit size at most 60, of the
/// shape the engines specialise in.
pub struct CircuitCase {
    pub instance: cit_core::circuit::ProblemInstance,
    pub kind: CaseKind,
    /// Set for diagonal cases.
    pub diagonal: Option<cit_core::diagonal::DiagonalInstance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Sparse,
    Diagonal,
    General,
}

use cit_core::circuit::{sparse_circuit, CircuitBuilder, GateId, ProblemInstance, SparsePoly};
use cit_core::diagonal::DiagonalInstance;

/// Terms vanishing at `zeta_n`: `sum_j x^{c + j n/p}` for a prime `p | n`.
fn vanishing_terms(rng: &mut impl Rng, n: u64) -> Option<Vec<(i64, u64)>> {
    let p = (2..=n).find(|p| n.is_multiple_of(*p))?;
    let c = rng.gen_range(0..n);
    Some((0..p).map(|j| (1, (c + j * (n / p)) % n)).collect())
}

fn random_terms(rng: &mut impl Rng, n: u64, max_len: usize, coeff: i64) -> Vec<(i64, u64)> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| {
            let c = rng.gen_range(1..=coeff) * if rng.gen_bool(0.5) { -1 } else { 1 };
            (c, rng.gen_range(0..2 * n))
        })
        .collect()
}

fn sum_gate(b: &mut CircuitBuilder, terms: &[(i64, u64)]) -> GateId {
    let leaves: Vec<(i64, GateId)> = terms.iter().map(|&(c, e)| (c, b.input(e))).collect();
    b.sum(leaves)
}

fn sparse_case(rng: &mut impl Rng, n: u64) -> CircuitCase {
    let mut f = SparsePoly::from_terms(random_terms(rng, n, 6, 9));
    if rng.gen_bool(0.4) {
        if let Some(v) = vanishing_terms(rng, n) {
            f = f.mul(&SparsePoly::from_terms(v)).reduce_exponents(&n.into());
        }
    }
    let terms: Vec<_> = f.terms().to_vec();
    CircuitCase { instance: ProblemInstance::new(sparse_circuit(terms), n), kind: CaseKind::Sparse, diagonal: None }
}

fn diagonal_case(rng: &mut impl Rng, n: u64) -> CircuitCase {
    let orders: Vec<u64> = (2..=5).filter(|r| n.is_multiple_of(*r)).collect();
    let (g, powers): (Vec<(i64, u64)>, Vec<u64>) = if !orders.is_empty() && rng.gen_bool(0.4) {
        // g(zeta_n) a primitive r-th root z, and z + z^2 + ... + z^r = 0
        let r = orders[rng.gen_range(0..orders.len())];
        (vec![(1, n / r)], (1..=r).collect())
    } else {
        let k = rng.gen_range(1..=3);
        (random_terms(rng, n, 3, 3), (0..k).map(|_| rng.gen_range(1..=5)).collect())
    };
    let mut b = CircuitBuilder::new();
    let g_gate = sum_gate(&mut b, &g);
    let powered: Vec<(i64, GateId)> = powers.iter().map(|&d| (1, b.product(vec![g_gate; d as usize]))).collect();
    let out = b.sum(powered);
    let diag = DiagonalInstance::new(SparsePoly::from_terms(g), powers, n).unwrap();
    CircuitCase {
        instance: ProblemInstance::new(b.finish(out).unwrap(), n),
        kind: CaseKind::Diagonal,
        diagonal: Some(diag),
    }
}

fn general_case(rng: &mut impl Rng, n: u64) -> CircuitCase {
    let mut b = CircuitBuilder::new();
    let mut addends = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut factors: Vec<GateId> = (0..rng.gen_range(2..=3)).map(|_| {
            let t = random_terms(rng, n, 3, 4);
            sum_gate(&mut b, &t)
        }).collect();
        if rng.gen_bool(0.3) {
            if let Some(v) = vanishing_terms(rng, n) {
                factors.push(sum_gate(&mut b, &v));
            }
        }
        addends.push((1i64, b.product(factors)));
    }
    if rng.gen_bool(0.25) {
        // a second copy, negated, of the first addend
        let first = addends[0].1;
        addends.push((-1, first));
    }
    let out = b.sum(addends);
    CircuitCase { instance: ProblemInstance::new(b.finish(out).unwrap(), n), kind: CaseKind::General, diagonal: None }
}

/// `count` cases drawn with seed `seed`, cycling through the three kinds.
pub fn circuit_cases(count: usize, seed: u64) -> Vec<CircuitCase> {
    let mut rng = cit_core::trial_rng(seed, 1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(2..=128u64);
        let case = match out.len() % 3 {
            0 => sparse_case(&mut rng, n),
            1 => diagonal_case(&mut rng, n),
            _ => general_case(&mut rng, n),
        };
        if case.instance.circuit.size() <= 60 {
            out.push(case);
        }
    }
    out
}

/// Exact verdict from the dense oracle.
pub fn oracle_is_zero(instance: &ProblemInstance) -> bool {
    let cfg = cit_core::oracle::OracleConfig::with_phi_cap(128);
    cit_core::oracle::is_zero_at_root_of_unity(&instance.circuit, &instance.n, &cfg).unwrap()
}

/// Kernel of the `phi(n) x s` matrix whose columns are `zeta_n^{k_i}` in the
/// power basis.
pub fn oracle_kernel(
    ring: &cit_core::oracle::CyclotomicRing,
    k: &[num_bigint::BigUint],
) -> cit_core::sparse_cit::RationalSubspace {
    let cols: Vec<_> = k.iter().map(|e| ring.zeta_pow(e)).collect();
    let rows: Vec<Vec<num_bigint::BigInt>> =
        (0..ring.dim()).map(|r| cols.iter().map(|c| c.coeffs()[r].clone()).collect()).collect();
    cit_core::sparse_cit::RationalSubspace::kernel_of(&rows, k.len())
}
