use num_bigint::BigUint;
use num_traits::One;

use super::{Circuit, Gate};

/// Inductive degree: inputs 1, sums the maximum, products the sum over
/// children. Unreachable gates do not contribute.
pub fn syntactic_degree(circuit: &Circuit) -> BigUint {
    gate_degrees(circuit)[circuit.output()].clone()
}

pub(crate) fn gate_degrees(circuit: &Circuit) -> Vec<BigUint> {
    let mut deg: Vec<BigUint> = Vec::with_capacity(circuit.len());
    for gate in circuit.gates() {
        let d = match gate {
            Gate::Input(_) => BigUint::one(),
            Gate::Sum(terms) => terms.iter().map(|(_, c)| &deg[*c]).max().cloned().unwrap_or_default(),
            Gate::Product(factors) => factors.iter().map(|c| &deg[*c]).sum(),
        };
        deg.push(d);
    }
    deg
}

/// Structural class of a circuit, from most to least specific.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitClass {
    /// Syntactic degree 1: a sparse polynomial.
    Sparse,
    /// Every product gate has at most one non-leaf child.
    PowerfulSkew,
    /// Syntactic degree at most the configured threshold.
    BoundedDegree(BigUint),
    General,
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub degree_threshold: BigUint,
}

impl ClassifyConfig {
    /// Threshold `4 * source_len`, or the declared degree bound when present.
    pub fn for_source(source_len: usize, degree_bound: Option<&BigUint>) -> Self {
        let degree_threshold = degree_bound
            .cloned()
            .unwrap_or_else(|| BigUint::from(4 * source_len as u64));
        ClassifyConfig { degree_threshold }
    }
}

pub fn classify(circuit: &Circuit, config: &ClassifyConfig) -> CircuitClass {
    let live = circuit.reachable();
    let degree = syntactic_degree(circuit);
    if degree.is_one() {
        return CircuitClass::Sparse;
    }
    let gates = circuit.gates();
    let skew = gates.iter().enumerate().filter(|(id, _)| live[*id]).all(|(_, g)| match g {
        Gate::Product(factors) => {
            let non_leaf = factors.iter().filter(|&&c| !gates[c].is_leaf()).count();
            non_leaf <= 1
        }
        _ => true,
    });
    if skew {
        return CircuitClass::PowerfulSkew;
    }
    if degree <= config.degree_threshold {
        return CircuitClass::BoundedDegree(degree);
    }
    CircuitClass::General
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{sparse_circuit, CircuitBuilder};
    use num_traits::Pow;

    fn cfg(t: u64) -> ClassifyConfig {
        ClassifyConfig { degree_threshold: BigUint::from(t) }
    }

    fn squaring_chain(depth: u32) -> Circuit {
        let mut b = CircuitBuilder::new();
        let x = b.input(1u32);
        let y = b.input(2u32);
        let mut g = b.sum([(1, x), (1, y)]);
        for _ in 0..depth {
            g = b.product([g, g]);
        }
        b.finish(g).unwrap()
    }

    #[test]
    fn phi6_is_sparse_degree_one() {
        let c = sparse_circuit([(1, 0u32), (-1, 1), (1, 2)]);
        assert_eq!(syntactic_degree(&c), BigUint::one());
        assert_eq!(classify(&c, &cfg(100)), CircuitClass::Sparse);
    }

    #[test]
    fn product_tree_degree() {
        for k in 1..20usize {
            let mut b = CircuitBuilder::new();
            let mut layer: Vec<_> = (0..k).map(|i| b.input(i as u32)).collect();
            while layer.len() > 1 {
                layer = layer
                    .chunks(2)
                    .map(|ch| if ch.len() == 2 { b.product([ch[0], ch[1]]) } else { ch[0] })
                    .collect();
            }
            let c = b.finish(layer[0]).unwrap();
            assert_eq!(syntactic_degree(&c), BigUint::from(k));
        }
    }

    #[test]
    fn squaring_chain_degree_and_class() {
        for t in [0u32, 1, 5, 40] {
            assert_eq!(syntactic_degree(&squaring_chain(t)), BigUint::from(2u32).pow(t));
        }
        assert_eq!(classify(&squaring_chain(40), &cfg(10_000)), CircuitClass::General);
        assert_eq!(
            classify(&squaring_chain(3), &cfg(10_000)),
            CircuitClass::BoundedDegree(BigUint::from(8u32))
        );
    }

    #[test]
    fn skew_products_with_leaves() {
        let mut b = CircuitBuilder::new();
        let one = b.input(0u32);
        let p = b.sum([(3, one)]);
        let x5 = b.input(5u32);
        let m = b.product([x5, p]);
        let s = b.sum([(1, p), (1, m)]);
        let c = b.finish(s).unwrap();
        assert_eq!(classify(&c, &cfg(0)), CircuitClass::PowerfulSkew);
    }
}
