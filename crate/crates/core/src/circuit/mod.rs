//! Algebraic circuits over a single variable `x` whose leaves are monomials
//! `x^e` with binary-encoded exponents.
//!
//! A [`Circuit`] is an ordered list of gates in which every gate only refers
//! to gates that precede it, so the list order is a topological order of the
//! underlying DAG. Sum gates carry integer weights on their incoming edges;
//! product gates are unweighted and n-ary.

mod analysis;
mod parse;
mod sparse;

pub use analysis::{classify, syntactic_degree, CircuitClass, ClassifyConfig};
pub use parse::{parse_circuit, parse_circuit_file, print_circuit, print_circuit_file, CircuitFile};
pub use sparse::{parse_sparse_poly_file, print_sparse_poly_file, to_sparse, SparsePoly, SparsePolyFile, TooLarge};

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use crate::nt::{bit_size, bit_size_unsigned};

/// Index of a gate inside its circuit.
pub type GateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    /// The monomial `x^e`.
    Input(BigUint),
    /// `sum_i w_i * child_i`.
    Sum(Vec<(BigInt, GateId)>),
    /// `prod_i child_i`.
    Product(Vec<GateId>),
}

impl Gate {
    pub fn children(&self) -> Box<dyn Iterator<Item = GateId> + '_> {
        match self {
            Gate::Input(_) => Box::new(std::iter::empty()),
            Gate::Sum(terms) => Box::new(terms.iter().map(|(_, g)| *g)),
            Gate::Product(factors) => Box::new(factors.iter().copied()),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Gate::Input(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: gate `{name}` is used before it is defined (cycle or out-of-order reference)")]
    Cycle { line: usize, name: String },
    #[error("line {line}: reference to undefined gate `{name}`")]
    Dangling { line: usize, name: String },
    #[error("gate {gate} references gate {child}, which does not precede it")]
    BadReference { gate: GateId, child: GateId },
    #[error("gate {0} is an empty sum")]
    EmptySum(GateId),
    #[error("gate {0} is an empty product")]
    EmptyProduct(GateId),
    #[error("no output gate designated")]
    NoOutput,
    #[error("output gate {0} does not exist")]
    BadOutput(GateId),
    #[error("syntactic degree {degree} exceeds declared degree bound {bound}")]
    DegreeBound { degree: BigUint, bound: BigUint },
}

/// A validated circuit; immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    gates: Vec<Gate>,
    output: GateId,
}

impl Circuit {
    /// Validates acyclicity (children precede parents), non-empty sums and
    /// products, and the output index.
    pub fn new(gates: Vec<Gate>, output: GateId) -> Result<Self, CircuitError> {
        if gates.is_empty() {
            return Err(CircuitError::NoOutput);
        }
        if output >= gates.len() {
            return Err(CircuitError::BadOutput(output));
        }
        for (id, gate) in gates.iter().enumerate() {
            match gate {
                Gate::Sum(t) if t.is_empty() => return Err(CircuitError::EmptySum(id)),
                Gate::Product(f) if f.is_empty() => return Err(CircuitError::EmptyProduct(id)),
                _ => {}
            }
            if let Some(child) = gate.children().find(|&c| c >= id) {
                return Err(CircuitError::BadReference { gate: id, child });
            }
        }
        Ok(Circuit { gates, output })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.gates.iter().map(|g| g.children().count()).sum()
    }

    /// Total bit size of all integer constants: input exponents and sum weights.
    pub fn constant_bits(&self) -> u64 {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Input(e) => bit_size_unsigned(e),
                Gate::Sum(terms) => terms.iter().map(|(w, _)| bit_size(w)).sum(),
                Gate::Product(_) => 0,
            })
            .sum()
    }

    /// Circuit size: edges plus constant bits.
    pub fn size(&self) -> u64 {
        self.edge_count() as u64 + self.constant_bits()
    }

    /// Flags the gates the output depends on.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.gates.len()];
        seen[self.output] = true;
        for id in (0..self.gates.len()).rev() {
            if seen[id] {
                for c in self.gates[id].children() {
                    seen[c] = true;
                }
            }
        }
        seen
    }

    /// Largest input exponent appearing in the circuit.
    pub fn max_exponent(&self) -> BigUint {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Input(e) => Some(e.clone()),
                _ => None,
            })
            .max()
            .unwrap_or_default()
    }

    /// Bottom-up evaluation of the gates the output depends on.
    pub fn evaluate<E: CircuitEvaluator>(&self, eval: &mut E) -> Result<E::Value, E::Error> {
        let live = self.reachable();
        let mut values: Vec<Option<E::Value>> = vec![None; self.gates.len()];
        for (id, gate) in self.gates.iter().enumerate() {
            if !live[id] {
                continue;
            }
            let get = |c: GateId| values[c].as_ref().expect("children precede parents");
            let v = match gate {
                Gate::Input(e) => eval.input(e)?,
                Gate::Sum(terms) => {
                    let refs: Vec<(&BigInt, &E::Value)> = terms.iter().map(|(w, c)| (w, get(*c))).collect();
                    eval.sum(&refs)?
                }
                Gate::Product(factors) => {
                    let refs: Vec<&E::Value> = factors.iter().map(|c| get(*c)).collect();
                    eval.product(&refs)?
                }
            };
            values[id] = Some(v);
        }
        Ok(values[self.output].take().expect("output is live"))
    }
}

/// The semantics a circuit is evaluated in.
pub trait CircuitEvaluator {
    type Value: Clone;
    type Error;

    fn input(&mut self, exponent: &BigUint) -> Result<Self::Value, Self::Error>;
    fn sum(&mut self, terms: &[(&BigInt, &Self::Value)]) -> Result<Self::Value, Self::Error>;
    fn product(&mut self, factors: &[&Self::Value]) -> Result<Self::Value, Self::Error>;
}

/// Incremental construction of circuits from code.
#[derive(Default, Debug, Clone)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, exponent: impl Into<BigUint>) -> GateId {
        self.push(Gate::Input(exponent.into()))
    }

    pub fn sum<W: Into<BigInt>>(&mut self, terms: impl IntoIterator<Item = (W, GateId)>) -> GateId {
        let terms = terms.into_iter().map(|(w, g)| (w.into(), g)).collect();
        self.push(Gate::Sum(terms))
    }

    pub fn product(&mut self, factors: impl IntoIterator<Item = GateId>) -> GateId {
        self.push(Gate::Product(factors.into_iter().collect()))
    }

    pub fn push(&mut self, gate: Gate) -> GateId {
        self.gates.push(gate);
        self.gates.len() - 1
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn finish(self, output: GateId) -> Result<Circuit, CircuitError> {
        Circuit::new(self.gates, output)
    }
}

/// A circuit together with the order `n` of the root of unity it is tested at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub circuit: Circuit,
    pub n: BigUint,
}

impl ProblemInstance {
    pub fn new(circuit: Circuit, n: impl Into<BigUint>) -> Self {
        let n = n.into();
        assert!(n > BigUint::default(), "root-of-unity order must be positive");
        ProblemInstance { circuit, n }
    }

    /// Combined size: circuit edges, constant bits, and the bit length of `n`.
    pub fn size(&self) -> u64 {
        self.circuit.size() + bit_size_unsigned(&self.n)
    }
}

/// Builds the sparse circuit `sum_i c_i x^{k_i}` (one sum over leaves).
pub fn sparse_circuit<C, E>(terms: impl IntoIterator<Item = (C, E)>) -> Circuit
where
    C: Into<BigInt>,
    E: Into<BigUint>,
{
    let mut b = CircuitBuilder::new();
    let mut addends = Vec::new();
    for (c, e) in terms {
        let leaf = b.input(e);
        addends.push((c.into(), leaf));
    }
    if addends.is_empty() {
        let leaf = b.input(0u32);
        addends.push((BigInt::default(), leaf));
    }
    let out = b.sum(addends);
    b.finish(out).expect("well-formed by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_forward_reference() {
        let gates = vec![Gate::Product(vec![1]), Gate::Input(BigUint::from(1u32))];
        assert_eq!(
            Circuit::new(gates, 0),
            Err(CircuitError::BadReference { gate: 0, child: 1 })
        );
    }

    #[test]
    fn rejects_empty_sum() {
        assert_eq!(Circuit::new(vec![Gate::Sum(vec![])], 0), Err(CircuitError::EmptySum(0)));
    }

    #[test]
    fn phi6_size_with_n12() {
        let c = sparse_circuit([(1, 0u32), (-1, 1), (1, 2)]);
        // 3 edges, weights 1+1+1, exponents 1+1+2, bits(12) = 4
        assert_eq!(ProblemInstance::new(c, 12u32).size(), 14);
    }

    #[test]
    fn single_leaf_size() {
        let mut b = CircuitBuilder::new();
        let g = b.input(0u32);
        let c = b.finish(g).unwrap();
        // bits(0) + bits(2)
        assert_eq!(ProblemInstance::new(c, 2u32).size(), 3);
    }

    #[test]
    fn doubling_n_adds_one_bit() {
        let c = sparse_circuit([(1, 0u32), (-1, 1), (1, 2)]);
        for n in 1u32..200 {
            let a = ProblemInstance::new(c.clone(), n).size();
            let b = ProblemInstance::new(c.clone(), 2 * n).size();
            assert_eq!(b, a + 1);
        }
    }

    #[test]
    fn unreachable_gates_are_counted_but_not_evaluated() {
        let mut b = CircuitBuilder::new();
        let x = b.input(1u32);
        let _dead = b.input(7u32);
        let c = b.finish(x).unwrap();
        assert_eq!(c.reachable(), vec![true, false]);
        assert_eq!(c.constant_bits(), 1 + 3);
    }
}
