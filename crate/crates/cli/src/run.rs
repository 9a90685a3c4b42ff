use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cit_core::circuit::{
    classify, parse_circuit_file, to_sparse, Circuit, CircuitClass, CircuitFile, ClassifyConfig, ProblemInstance,
};
use cit_core::diagonal::{diagonal_cit, parse_diagonal_file, DiagonalConfig, DiagonalInstance, GeneratorBound};
use cit_core::ff::certificate::{make_certificate, verify_certificate, CertificateSearch, NonZeroCertificate};
use cit_core::ff::{cit_ff, FfConfig};
use cit_core::numeric::{budget_for, cit_numeric, NumericConfig, NumericError};
use cit_core::oracle::{eval_circuit_exact, CyclotomicRing, OracleConfig};
use cit_core::slp::{parse_slp, slp_equal, SlpConfig, SlpVerdict};
use cit_core::sparse_cit::sparse_cit;
use cit_core::Verdict;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

use crate::Algo;

/// Largest expansion the sparse engine accepts.
const SPARSE_TERM_LIMIT: usize = 1 << 16;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inapplicable input.
    Input(String),
    /// The engine ran but produced no answer.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

fn input_err(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub struct Options {
    pub circuit: PathBuf,
    pub n: Option<String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub json: bool,
    pub verbose: bool,
    pub grh_multiplier: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub engine: &'static str,
    pub verdict: String,
    pub conditional: bool,
    pub seed: u64,
    pub trials: usize,
    pub timing_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Value>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "verdict: {}\nengine: {}\nconditional: {}\nseed: {}\ntrials: {}\ntiming_ms: {}\n",
            self.verdict, self.engine, self.conditional, self.seed, self.trials, self.timing_ms
        );
        if let Some(t) = &self.transcript {
            out.push_str(&format!("transcript: {}\n", serde_json::to_string_pretty(t).expect("json value")));
        }
        out
    }

    pub fn slp_word(&self) -> &'static str {
        match self.verdict.as_str() {
            "Equal" => "equal",
            "NotEqual" => "not-equal",
            _ => "inconclusive",
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.verdict == "Inconclusive" {
            3
        } else {
            0
        }
    }
}

enum Input {
    Circuit(CircuitFile),
    Diagonal(DiagonalInstance),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn is_diagonal_text(text: &str) -> bool {
    text.lines().any(|l| {
        let l = l.trim_start();
        l.starts_with("powers:") || l.starts_with("g:")
    })
}

fn parse_n(n: Option<&str>) -> Result<Option<BigUint>, CliError> {
    n.map(|v| v.parse::<BigUint>().map_err(|_| CliError::Input(format!("invalid n `{v}`"))))
        .transpose()
}

fn load(opts: &Options) -> Result<Input, CliError> {
    let text = read(&opts.circuit)?;
    let n = parse_n(opts.n.as_deref())?;
    if is_diagonal_text(&text) {
        let mut inst = parse_diagonal_file(&text).map_err(input_err)?;
        if let Some(n) = n {
            inst = DiagonalInstance::new(inst.g, inst.powers, n).map_err(input_err)?;
        }
        return Ok(Input::Diagonal(inst));
    }
    let mut file = parse_circuit_file(&text).map_err(input_err)?;
    if n.is_some() {
        file.n = n;
    }
    Ok(Input::Circuit(file))
}

impl Input {
    fn instance(&self) -> Result<ProblemInstance, CliError> {
        match self {
            Input::Circuit(f) => f.instance(None).map_err(input_err),
            Input::Diagonal(d) => Ok(ProblemInstance::new(d.expand().to_circuit(), d.n.clone())),
        }
    }
}

/// Engine chosen by `--algo auto`.
fn auto_engine(input: &Input) -> Result<Algo, CliError> {
    let file = match input {
        Input::Diagonal(_) => return Ok(Algo::Diagonal),
        Input::Circuit(f) => f,
    };
    let cfg = ClassifyConfig::for_source(file.source_len, file.degree_bound.as_ref());
    Ok(match classify(&file.circuit, &cfg) {
        CircuitClass::Sparse => Algo::Sparse,
        CircuitClass::PowerfulSkew | CircuitClass::BoundedDegree(_) => {
            if budget_for(&input.instance()?).is_ok() {
                Algo::Numeric
            } else {
                Algo::Ff
            }
        }
        CircuitClass::General => Algo::Ff,
    })
}

fn verdict_name(v: Verdict) -> String {
    format!("{v:?}")
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("transcripts serialize")
}

struct EngineRun {
    engine: &'static str,
    verdict: Verdict,
    conditional: bool,
    trials: usize,
    transcript: Value,
}

fn small_n(n: &BigUint) -> Result<u64, CliError> {
    n.to_u64().ok_or_else(|| CliError::Input(format!("n = {n} is too large for the oracle")))
}

fn oracle_verdict(circuit: &Circuit, n: &BigUint) -> Result<(bool, Value), CliError> {
    let ring = CyclotomicRing::new(small_n(n)?, &OracleConfig::from_env()).map_err(input_err)?;
    let value = eval_circuit_exact(circuit, &ring).map_err(input_err)?;
    let coeffs: Vec<String> = value.coeffs().iter().map(ToString::to_string).collect();
    Ok((value.is_zero(), serde_json::json!({ "phi": ring.dim(), "coefficients": coeffs })))
}

fn run_engine(input: &Input, algo: Algo, opts: &Options) -> Result<EngineRun, CliError> {
    let run = match algo {
        Algo::Auto => return run_engine(input, auto_engine(input)?, opts),
        Algo::Oracle => {
            let inst = input.instance()?;
            let (zero, transcript) = oracle_verdict(&inst.circuit, &inst.n)?;
            let verdict = if zero { Verdict::Zero } else { Verdict::NonZero };
            EngineRun { engine: "oracle", verdict, conditional: false, trials: 0, transcript }
        }
        Algo::Sparse => {
            let inst = input.instance()?;
            let poly = to_sparse(&inst.circuit, SPARSE_TERM_LIMIT).map_err(input_err)?;
            let verdict = sparse_cit(&poly, &inst.n);
            let transcript = serde_json::json!({ "terms": poly.len() });
            EngineRun { engine: "sparse-cit", verdict, conditional: false, trials: 0, transcript }
        }
        Algo::Diagonal => {
            let Input::Diagonal(inst) = input else {
                return Err(CliError::Input("the diagonal engine needs a diagonal file".into()));
            };
            let generators = opts.grh_multiplier.map_or(GeneratorBound::default(), GeneratorBound::Multiplier);
            let out = diagonal_cit(inst, &DiagonalConfig { generators }).map_err(|e| CliError::Failed(e.to_string()))?;
            EngineRun {
                engine: "diagonal-cit",
                verdict: out.verdict,
                conditional: out.conditional,
                trials: 0,
                transcript: to_value(&out),
            }
        }
        Algo::Numeric => {
            let inst = input.instance()?;
            let cfg = NumericConfig { trials: opts.trials.unwrap_or(NumericConfig::default().trials), ..Default::default() };
            match cit_numeric(&inst, opts.seed, &cfg) {
                Ok(out) => EngineRun {
                    engine: "numeric-cit",
                    verdict: out.verdict,
                    conditional: false,
                    trials: cfg.trials,
                    transcript: to_value(&out),
                },
                Err(e @ NumericError::NotApplicable(_)) => return Err(input_err(e)),
                Err(e) => EngineRun {
                    engine: "numeric-cit",
                    verdict: Verdict::Inconclusive,
                    conditional: false,
                    trials: cfg.trials,
                    transcript: to_value(&e),
                },
            }
        }
        Algo::Ff => {
            let inst = input.instance()?;
            let cfg = FfConfig { trials: opts.trials.unwrap_or(FfConfig::default().trials), ..Default::default() };
            let out = cit_ff(&inst, opts.seed, &cfg);
            EngineRun { engine: "ff-cit", verdict: out.verdict, conditional: true, trials: cfg.trials, transcript: to_value(&out) }
        }
    };
    Ok(run)
}

pub fn check(opts: &Options, algo: Algo) -> Result<Report, CliError> {
    let input = load(opts)?;
    let start = Instant::now();
    let run = run_engine(&input, algo, opts)?;
    Ok(Report {
        engine: run.engine,
        verdict: verdict_name(run.verdict),
        conditional: run.conditional,
        seed: opts.seed,
        trials: run.trials,
        timing_ms: start.elapsed().as_millis() as u64,
        transcript: opts.verbose.then_some(run.transcript),
    })
}

pub fn slp_eq(first: &Path, second: &Path, seed: u64, trials: usize, verbose: bool) -> Result<Report, CliError> {
    let g1 = parse_slp(&read(first)?).map_err(|e| CliError::Input(format!("{}: {e}", first.display())))?;
    let g2 = parse_slp(&read(second)?).map_err(|e| CliError::Input(format!("{}: {e}", second.display())))?;
    let start = Instant::now();
    let out = slp_equal(&g1, &g2, seed, &SlpConfig { trials, ..Default::default() });
    let verdict = match out.verdict {
        SlpVerdict::Equal => "Equal",
        SlpVerdict::NotEqual => "NotEqual",
        SlpVerdict::Inconclusive => "Inconclusive",
    };
    Ok(Report {
        engine: "slp-eq",
        verdict: verdict.into(),
        conditional: false,
        seed,
        trials,
        timing_ms: start.elapsed().as_millis() as u64,
        transcript: verbose.then(|| to_value(&out)),
    })
}

fn load_instance(circuit: &Path, n: Option<&str>) -> Result<ProblemInstance, CliError> {
    let file = parse_circuit_file(&read(circuit)?).map_err(input_err)?;
    let n = parse_n(n)?;
    file.instance(n.as_ref()).map_err(input_err)
}

pub fn certificate_gen(circuit: &Path, n: Option<&str>, p_bound: Option<&str>) -> Result<String, CliError> {
    let inst = load_instance(circuit, n)?;
    let search = CertificateSearch { p_bound: parse_n(p_bound)?, ..Default::default() };
    let cert = make_certificate(&inst, &search).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(cert.to_json() + "\n")
}

pub fn certificate_verify(circuit: &Path, n: Option<&str>, cert: &Path) -> Result<bool, CliError> {
    let inst = load_instance(circuit, n)?;
    let cert = NonZeroCertificate::from_json(&read(cert)?).map_err(input_err)?;
    Ok(verify_certificate(&inst, &cert))
}

#[derive(Serialize)]
struct BenchRow {
    engine: &'static str,
    verdict: String,
    min_ms: f64,
    median_ms: f64,
}

pub fn bench(opts: &Options, repeat: usize) -> Result<String, CliError> {
    let input = load(opts)?;
    let mut rows = Vec::new();
    for algo in [Algo::Oracle, Algo::Sparse, Algo::Diagonal, Algo::Numeric, Algo::Ff] {
        let mut times = Vec::new();
        let mut verdict = None;
        for _ in 0..repeat.max(1) {
            let start = Instant::now();
            match run_engine(&input, algo, opts) {
                Ok(run) => {
                    times.push(start.elapsed().as_secs_f64() * 1e3);
                    verdict = Some((run.engine, run.verdict));
                }
                Err(_) => break,
            }
        }
        if let Some((engine, v)) = verdict {
            times.sort_by(f64::total_cmp);
            rows.push(BenchRow { engine, verdict: verdict_name(v), min_ms: times[0], median_ms: times[times.len() / 2] });
        }
    }
    if opts.json {
        return Ok(serde_json::to_string(&rows).expect("rows serialize") + "\n");
    }
    let mut out = format!("{:<14} {:<13} {:>10} {:>10}\n", "engine", "verdict", "min_ms", "median_ms");
    for r in rows {
        out.push_str(&format!("{:<14} {:<13} {:>10.3} {:>10.3}\n", r.engine, r.verdict, r.min_ms, r.median_ms));
    }
    Ok(out)
}
