//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! n 12
//! degree_bound 3
//! g0 = X^0
//! g1 = X^1
//! g2 = SUM 1*g0 -1*g1
//! g3 = MUL g2 g2
//! out g3
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};

use super::analysis::syntactic_degree;
use super::{Circuit, CircuitError, Gate, GateId, ProblemInstance};

/// A parsed circuit file: the circuit plus its headers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitFile {
    pub circuit: Circuit,
    pub n: Option<BigUint>,
    pub degree_bound: Option<BigUint>,
    /// Length in bytes of the source text.
    pub source_len: usize,
}

impl CircuitFile {
    /// The problem instance, with `n_override` taking precedence over the header.
    pub fn instance(&self, n_override: Option<&BigUint>) -> Result<ProblemInstance, CircuitError> {
        let n = n_override.or(self.n.as_ref()).cloned().ok_or(CircuitError::Syntax {
            line: 0,
            message: "missing `n` header".into(),
        })?;
        if n == BigUint::default() {
            return Err(CircuitError::Syntax { line: 0, message: "n must be positive".into() });
        }
        Ok(ProblemInstance { circuit: self.circuit.clone(), n })
    }
}

fn syntax(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Syntax { line, message: message.into() }
}

fn is_gate_name(tok: &str) -> bool {
    tok.len() > 1 && tok.starts_with('g') && tok[1..].bytes().all(|b| b.is_ascii_digit())
}

fn parse_decimal<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, CircuitError> {
    tok.parse().map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

/// Parses the circuit text, ignoring the `n` and `degree_bound` headers.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    parse_circuit_file(text).map(|f| f.circuit)
}

pub fn parse_circuit_file(text: &str) -> Result<CircuitFile, CircuitError> {
    // First pass: every defined name, so forward references can be told
    // apart from references to names that never appear.
    let mut defined_anywhere = HashSet::new();
    for raw in text.lines() {
        let line = strip_comment(raw);
        if let Some((lhs, _)) = line.split_once('=') {
            let lhs = lhs.trim();
            if is_gate_name(lhs) {
                defined_anywhere.insert(lhs.to_string());
            }
        }
    }

    let mut names: HashMap<String, GateId> = HashMap::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut output: Option<GateId> = None;
    let mut n = None;
    let mut degree_bound = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let resolve = |name: &str| -> Result<GateId, CircuitError> {
            if !is_gate_name(name) {
                return Err(syntax(lineno, format!("expected gate name, found `{name}`")));
            }
            match names.get(name) {
                Some(&id) => Ok(id),
                None if defined_anywhere.contains(name) => {
                    Err(CircuitError::Cycle { line: lineno, name: name.to_string() })
                }
                None => Err(CircuitError::Dangling { line: lineno, name: name.to_string() }),
            }
        };

        let mut words = line.split_whitespace();
        let head = words.next().expect("non-empty line");
        match head {
            "n" => {
                let v = words.next().ok_or_else(|| syntax(lineno, "`n` needs a value"))?;
                n = Some(parse_decimal::<BigUint>(v, lineno, "n")?);
                expect_end(words, lineno)?;
                continue;
            }
            "degree_bound" => {
                let v = words.next().ok_or_else(|| syntax(lineno, "`degree_bound` needs a value"))?;
                degree_bound = Some(parse_decimal::<BigUint>(v, lineno, "degree bound")?);
                expect_end(words, lineno)?;
                continue;
            }
            "out" => {
                let mut target = words.next().ok_or_else(|| syntax(lineno, "`out` needs a gate"))?;
                if target == "=" {
                    target = words.next().ok_or_else(|| syntax(lineno, "`out` needs a gate"))?;
                }
                if output.is_some() {
                    return Err(syntax(lineno, "output designated twice"));
                }
                output = Some(resolve(target)?);
                expect_end(words, lineno)?;
                continue;
            }
            _ => {}
        }

        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| syntax(lineno, format!("unrecognised line `{line}`")))?;
        let lhs = lhs.trim();
        if !is_gate_name(lhs) {
            return Err(syntax(lineno, format!("invalid gate name `{lhs}`")));
        }
        if names.contains_key(lhs) {
            return Err(syntax(lineno, format!("gate `{lhs}` defined twice")));
        }
        let mut toks = rhs.split_whitespace();
        let op = toks.next().ok_or_else(|| syntax(lineno, "missing gate body"))?;
        let gate = match op {
            "SUM" | "sum" => {
                let mut terms = Vec::new();
                for t in toks {
                    let (w, g) = t
                        .split_once('*')
                        .ok_or_else(|| syntax(lineno, format!("sum term `{t}` is not `weight*gate`")))?;
                    let w = w.strip_prefix('+').unwrap_or(w);
                    terms.push((parse_decimal::<BigInt>(w, lineno, "weight")?, resolve(g)?));
                }
                if terms.is_empty() {
                    return Err(syntax(lineno, "empty sum"));
                }
                Gate::Sum(terms)
            }
            "MUL" | "mul" => {
                let factors = toks.map(resolve).collect::<Result<Vec<_>, _>>()?;
                if factors.is_empty() {
                    return Err(syntax(lineno, "empty product"));
                }
                Gate::Product(factors)
            }
            leaf => {
                let e = leaf
                    .strip_prefix("X^")
                    .or_else(|| leaf.strip_prefix("x^"))
                    .ok_or_else(|| syntax(lineno, format!("unknown gate body `{leaf}`")))?;
                expect_end(toks, lineno)?;
                Gate::Input(parse_decimal::<BigUint>(e, lineno, "exponent")?)
            }
        };
        names.insert(lhs.to_string(), gates.len());
        gates.push(gate);
    }

    let output = output.ok_or(CircuitError::NoOutput)?;
    let circuit = Circuit::new(gates, output)?;
    if let Some(bound) = &degree_bound {
        let degree = syntactic_degree(&circuit);
        if &degree > bound {
            return Err(CircuitError::DegreeBound { degree, bound: bound.clone() });
        }
    }
    Ok(CircuitFile { circuit, n, degree_bound, source_len: text.len() })
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(l, _)| l)
}

fn expect_end<'a>(mut rest: impl Iterator<Item = &'a str>, line: usize) -> Result<(), CircuitError> {
    match rest.next() {
        None => Ok(()),
        Some(t) => Err(syntax(line, format!("unexpected token `{t}`"))),
    }
}

/// Canonical text: gates named `g0..`, in order, output last.
pub fn print_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    write_gates(&mut out, circuit);
    out
}

pub fn print_circuit_file(file: &CircuitFile) -> String {
    let mut out = String::new();
    if let Some(n) = &file.n {
        let _ = writeln!(out, "n {n}");
    }
    if let Some(d) = &file.degree_bound {
        let _ = writeln!(out, "degree_bound {d}");
    }
    write_gates(&mut out, &file.circuit);
    out
}

fn write_gates(out: &mut String, circuit: &Circuit) {
    for (id, gate) in circuit.gates().iter().enumerate() {
        let _ = write!(out, "g{id} = ");
        match gate {
            Gate::Input(e) => {
                let _ = write!(out, "X^{e}");
            }
            Gate::Sum(terms) => {
                out.push_str("SUM");
                for (w, c) in terms {
                    let _ = write!(out, " {w}*g{c}");
                }
            }
            Gate::Product(factors) => {
                out.push_str("MUL");
                for c in factors {
                    let _ = write!(out, " g{c}");
                }
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "out g{}", circuit.output());
}
