//! Equality of grammar-compressed strings.
//!
//! A word `w` is encoded as `P_w(x) = sum_i code(w_i) x^i`, computed from the
//! grammar by `P_{BC} = P_B + x^{|B|} P_C`. Two words of equal length are
//! equal iff the difference polynomial vanishes at `zeta_n` for
//! `n = 2^{4s}`, which is tested at random odd conjugates in ball
//! arithmetic. Equal words are always reported equal.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, GateId};
use crate::nt::bit_size_unsigned;
use crate::numeric::{eval_circuit_ball, NumericError, PrecisionBudget};
use crate::trial_rng;

/// Index of a node in [`Slp::nodes`].
pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Terminal(char),
    Pair(NodeId, NodeId),
}

/// A straight-line program with binary productions, children before
/// parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slp {
    nodes: Vec<Node>,
    start: NodeId,
    names: HashMap<String, NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("empty grammar")]
    Empty,
    #[error("nonterminal `{0}` has more than one production")]
    Duplicate(String),
    #[error("nonterminal `{0}` is used but never defined")]
    Undefined(String),
    #[error("nonterminal `{0}` derives itself")]
    Cycle(String),
    #[error("word longer than {limit}")]
    TooLong { limit: u64 },
    #[error("node {0} out of range")]
    BadNode(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sym {
    T(char),
    N(String),
}

fn parse_rhs(rhs: &str, line: usize) -> Result<Vec<Sym>, SlpError> {
    let err = |message: String| SlpError::Syntax { line, message };
    let mut out = Vec::new();
    let mut chars = rhs.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '\'' {
            chars.next();
            let sym = chars.next().ok_or_else(|| err("unterminated terminal".into()))?;
            if chars.next() != Some('\'') {
                return Err(err("terminal must be a single character in quotes".into()));
            }
            out.push(Sym::T(sym));
        } else {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '\'' {
                    break;
                }
                name.push(c);
                chars.next();
            }
            out.push(Sym::N(name));
        }
    }
    if out.is_empty() {
        return Err(err("empty right-hand side".into()));
    }
    Ok(out)
}

/// One production per line, `NT -> X Y ...` with nonterminal names or quoted
/// single characters; the first line defines the start symbol. Right-hand
/// sides of any length are split into binary productions.
pub fn parse_slp(text: &str) -> Result<Slp, SlpError> {
    let mut order: Vec<String> = Vec::new();
    let mut rules: HashMap<String, Vec<Sym>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| SlpError::Syntax { line: idx + 1, message: "expected `NT -> ...`".into() })?;
        let lhs = lhs.trim();
        if lhs.is_empty() || lhs.contains(char::is_whitespace) || lhs.contains('\'') {
            return Err(SlpError::Syntax { line: idx + 1, message: format!("bad nonterminal `{lhs}`") });
        }
        let rhs = parse_rhs(rhs, idx + 1)?;
        if rules.insert(lhs.to_string(), rhs).is_some() {
            return Err(SlpError::Duplicate(lhs.to_string()));
        }
        order.push(lhs.to_string());
    }
    if order.is_empty() {
        return Err(SlpError::Empty);
    }
    for rhs in rules.values() {
        for s in rhs {
            if let Sym::N(name) = s {
                if !rules.contains_key(name) {
                    return Err(SlpError::Undefined(name.clone()));
                }
            }
        }
    }
    resolve(&order, &rules)
}

/// Post-order over the nonterminals, detecting cycles, building nodes.
fn resolve(order: &[String], rules: &HashMap<String, Vec<Sym>>) -> Result<Slp, SlpError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done(NodeId),
    }
    let mut b = SlpBuilder::default();
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    for root in order {
        if marks.contains_key(root.as_str()) {
            continue;
        }
        let mut stack: Vec<(&str, bool)> = vec![(root.as_str(), false)];
        while let Some((name, expanded)) = stack.pop() {
            if expanded {
                let mut acc: Option<NodeId> = None;
                for s in &rules[name] {
                    let id = match s {
                        Sym::T(c) => b.terminal(*c),
                        Sym::N(child) => match marks[child.as_str()] {
                            Mark::Done(id) => id,
                            Mark::Open => unreachable!("children finish first"),
                        },
                    };
                    acc = Some(match acc {
                        None => id,
                        Some(left) => b.pair(left, id),
                    });
                }
                marks.insert(name, Mark::Done(acc.expect("non-empty rhs")));
                continue;
            }
            match marks.get(name) {
                Some(Mark::Done(_)) => continue,
                Some(Mark::Open) => return Err(SlpError::Cycle(name.to_string())),
                None => {}
            }
            marks.insert(name, Mark::Open);
            stack.push((name, true));
            for s in &rules[name] {
                if let Sym::N(child) = s {
                    match marks.get(child.as_str()) {
                        Some(Mark::Done(_)) => {}
                        Some(Mark::Open) => return Err(SlpError::Cycle(child.clone())),
                        None => stack.push((child.as_str(), false)),
                    }
                }
            }
        }
    }
    let names = marks
        .into_iter()
        .map(|(k, m)| match m {
            Mark::Done(id) => (k.to_string(), id),
            Mark::Open => unreachable!("all nonterminals finished"),
        })
        .collect::<HashMap<_, _>>();
    let start = names[order[0].as_str()];
    let mut slp = b.finish(start).expect("start node exists");
    slp.names = names;
    Ok(slp)
}

/// Builds grammars node by node; terminals are shared.
#[derive(Clone, Debug, Default)]
pub struct SlpBuilder {
    nodes: Vec<Node>,
    terminals: HashMap<char, NodeId>,
}

impl SlpBuilder {
    pub fn terminal(&mut self, c: char) -> NodeId {
        if let Some(&id) = self.terminals.get(&c) {
            return id;
        }
        self.nodes.push(Node::Terminal(c));
        let id = self.nodes.len() - 1;
        self.terminals.insert(c, id);
        id
    }

    /// Concatenation of two existing nodes.
    pub fn pair(&mut self, left: NodeId, right: NodeId) -> NodeId {
        assert!(left < self.nodes.len() && right < self.nodes.len(), "children must exist");
        self.nodes.push(Node::Pair(left, right));
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn finish(self, start: NodeId) -> Result<Slp, SlpError> {
        if self.nodes.is_empty() {
            return Err(SlpError::Empty);
        }
        if start >= self.nodes.len() {
            return Err(SlpError::BadNode(start));
        }
        Ok(Slp { nodes: self.nodes, start, names: HashMap::new() })
    }
}

impl Slp {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    /// Node of a named nonterminal from the source text.
    pub fn node_of(&self, name: &str) -> Option<NodeId> {
        self.names.get(name).copied()
    }

    /// Number of binary productions and terminals reachable from the start.
    pub fn size(&self) -> usize {
        self.reachable().iter().filter(|&&r| r).count()
    }

    fn reachable(&self) -> Vec<bool> {
        let mut live = vec![false; self.nodes.len()];
        live[self.start] = true;
        for id in (0..self.nodes.len()).rev() {
            if live[id] {
                if let Node::Pair(l, r) = self.nodes[id] {
                    live[l] = true;
                    live[r] = true;
                }
            }
        }
        live
    }

    /// Length of the word derived from every node.
    pub fn lengths(&self) -> Vec<BigUint> {
        let mut len: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let l = match *node {
                Node::Terminal(_) => BigUint::one(),
                Node::Pair(a, b) => &len[a] + &len[b],
            };
            len.push(l);
        }
        len
    }

    pub fn word_length(&self, node: NodeId) -> BigUint {
        self.lengths().swap_remove(node)
    }

    pub fn len(&self) -> BigUint {
        self.word_length(self.start)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Terminal symbols reachable from the start.
    pub fn alphabet(&self) -> BTreeSet<char> {
        let live = self.reachable();
        self.nodes
            .iter()
            .zip(live)
            .filter_map(|(n, l)| match n {
                Node::Terminal(c) if l => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// The derived word, if it has at most `limit` characters.
    pub fn decompress(&self, limit: u64) -> Result<String, SlpError> {
        if self.len() > BigUint::from(limit) {
            return Err(SlpError::TooLong { limit });
        }
        let mut out = String::new();
        let mut stack = vec![self.start];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Terminal(c) => out.push(c),
                Node::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        Ok(out)
    }

    /// Text form accepted by [`parse_slp`]; node `i` is named `N<i>`.
    pub fn to_text(&self) -> String {
        let live = self.reachable();
        let mut out = String::new();
        let line = |out: &mut String, id: NodeId| {
            let _ = match self.nodes[id] {
                Node::Terminal(c) => writeln!(out, "N{id} -> '{c}'"),
                Node::Pair(l, r) => writeln!(out, "N{id} -> N{l} N{r}"),
            };
        };
        line(&mut out, self.start);
        for id in (0..self.nodes.len()).filter(|&i| live[i] && i != self.start) {
            line(&mut out, id);
        }
        out
    }
}

/// Symbol codes `1..=k` over a sorted alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn of<'a>(slps: impl IntoIterator<Item = &'a Slp>) -> Self {
        let set: BTreeSet<char> = slps.into_iter().flat_map(Slp::alphabet).collect();
        Alphabet { symbols: set.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn code(&self, c: char) -> Option<u32> {
        self.symbols.binary_search(&c).ok().map(|i| i as u32 + 1)
    }
}

/// Circuit for `P_w` together with `|w|`.
#[derive(Clone, Debug)]
pub struct WordPolynomial {
    pub circuit: Circuit,
    pub length: BigUint,
}

/// Adds the gates for `P_w` of `slp` to `b`, sharing leaves through
/// `leaves`, and returns the output gate.
fn build_word(
    slp: &Slp,
    alphabet: &Alphabet,
    b: &mut CircuitBuilder,
    leaves: &mut HashMap<BigUint, GateId>,
) -> GateId {
    let live = slp.reachable();
    let lengths = slp.lengths();
    let mut leaf = |b: &mut CircuitBuilder, e: &BigUint| *leaves.entry(e.clone()).or_insert_with(|| b.input(e.clone()));
    let mut gate = vec![usize::MAX; slp.nodes.len()];
    for (id, node) in slp.nodes.iter().enumerate() {
        if !live[id] {
            continue;
        }
        gate[id] = match *node {
            Node::Terminal(c) => {
                let one = leaf(b, &BigUint::zero());
                let code = alphabet.code(c).expect("alphabet covers the grammar");
                b.sum([(code, one)])
            }
            Node::Pair(l, r) => {
                let shift = leaf(b, &lengths[l]);
                let shifted = b.product([shift, gate[r]]);
                b.sum([(1, gate[l]), (1, shifted)])
            }
        };
    }
    gate[slp.start]
}

pub fn to_word_polynomial(slp: &Slp, alphabet: &Alphabet) -> WordPolynomial {
    let mut b = CircuitBuilder::new();
    let out = build_word(slp, alphabet, &mut b, &mut HashMap::new());
    WordPolynomial { circuit: b.finish(out).expect("gates built in order"), length: slp.len() }
}

/// Circuit for `P_{w1} - P_{w2}`.
pub fn difference_circuit(g1: &Slp, g2: &Slp) -> Circuit {
    let alphabet = Alphabet::of([g1, g2]);
    let mut b = CircuitBuilder::new();
    let mut leaves = HashMap::new();
    let p1 = build_word(g1, &alphabet, &mut b, &mut leaves);
    let p2 = build_word(g2, &alphabet, &mut b, &mut leaves);
    let out = b.sum([(1, p1), (-1, p2)]);
    b.finish(out).expect("gates built in order")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SlpVerdict {
    Equal,
    NotEqual,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SlpConfig {
    pub trials: usize,
    /// Stop once one verdict holds a strict majority of `trials`.
    pub early_stop: bool,
}

impl Default for SlpConfig {
    fn default() -> Self {
        SlpConfig { trials: 25, early_stop: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlpTrial {
    pub a_low_bits: u64,
    pub working_bits: u64,
    pub retried: bool,
    pub mid: (f64, f64),
    pub rad_log2: Option<i64>,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlpOutcome {
    pub verdict: SlpVerdict,
    #[serde(serialize_with = "crate::serde_decimal")]
    pub length1: BigUint,
    #[serde(serialize_with = "crate::serde_decimal")]
    pub length2: BigUint,
    /// Size `s` of the difference circuit; the order is `n = 2^{4s}`.
    pub circuit_size: u64,
    /// A trial votes equal when `|f(zeta_n^a)| < 2^-threshold_exponent`.
    pub threshold_exponent: u64,
    pub trials: Vec<Result<SlpTrial, NumericError>>,
}

/// Precision plan: with `B = bits(L) + bits(k)` every conjugate of the
/// difference is at most `2^B`, so a nonzero one is below `2^{-2B}` for at
/// most a third of the conjugates.
fn slp_budget(length: &BigUint, alphabet_len: usize, gates: usize) -> PrecisionBudget {
    let big_b = bit_size_unsigned(length) + bit_size_unsigned(&BigUint::from(alphabet_len));
    let b = 2 * big_b;
    let working = b + big_b + bit_size_unsigned(&BigUint::from(gates)) + 24;
    PrecisionBudget { eps_exponent: working, threshold_exponent: b + 1, working_bits: working }
}

pub fn slp_equal(g1: &Slp, g2: &Slp, seed: u64, cfg: &SlpConfig) -> SlpOutcome {
    let (length1, length2) = (g1.len(), g2.len());
    let mut out = SlpOutcome {
        verdict: SlpVerdict::NotEqual,
        length1,
        length2,
        circuit_size: 0,
        threshold_exponent: 0,
        trials: Vec::new(),
    };
    if out.length1 != out.length2 {
        return out;
    }
    let circuit = difference_circuit(g1, g2);
    let s = circuit.size();
    out.circuit_size = s;
    let n = BigUint::one() << (4 * s);
    let budget = slp_budget(&out.length1, Alphabet::of([g1, g2]).len(), circuit.len());
    out.threshold_exponent = budget.threshold_exponent;
    let (mut equal, mut unequal) = (0, 0);
    for i in 0..cfg.trials {
        let mut rng = trial_rng(seed, i as u64);
        let a = rng.gen_biguint_below(&n) | BigUint::one();
        let trial = odd_conjugate_trial(&circuit, &n, &a, &budget);
        match &trial {
            Ok(t) if t.equal => equal += 1,
            Ok(_) => unequal += 1,
            Err(_) => {}
        }
        out.trials.push(trial);
        if cfg.early_stop && (2 * equal > cfg.trials || 2 * unequal > cfg.trials) {
            break;
        }
    }
    out.verdict = if 2 * equal > cfg.trials {
        SlpVerdict::Equal
    } else if 2 * unequal > cfg.trials {
        SlpVerdict::NotEqual
    } else {
        let done = out.trials.len();
        let inconclusive = out.trials.iter().filter(|t| t.is_err()).count();
        if 2 * inconclusive >= done || equal == unequal {
            SlpVerdict::Inconclusive
        } else if equal > unequal {
            SlpVerdict::Equal
        } else {
            SlpVerdict::NotEqual
        }
    };
    out
}

fn odd_conjugate_trial(
    circuit: &Circuit,
    n: &BigUint,
    a: &BigUint,
    budget: &PrecisionBudget,
) -> Result<SlpTrial, NumericError> {
    let (ball, used, retried) = match eval_circuit_ball(circuit, n, a, budget) {
        Ok(b) => (b, *budget, false),
        Err(NumericError::PrecisionExhausted { .. }) => {
            let wider = PrecisionBudget {
                eps_exponent: 2 * budget.eps_exponent,
                working_bits: 2 * budget.working_bits,
                ..*budget
            };
            (eval_circuit_ball(circuit, n, a, &wider)?, wider, true)
        }
        Err(e) => return Err(e),
    };
    Ok(SlpTrial {
        a_low_bits: a.iter_u64_digits().next().unwrap_or(0),
        working_bits: used.working_bits,
        retried,
        mid: ball.to_f64(),
        rad_log2: ball.rad_log2(),
        equal: ball.mid_abs_below(-(used.threshold_exponent as i64)),
    })
}
