//! End-to-end validation runs, reports, the fixture harness and
//! traceability tables.

mod explain;
mod harness;
mod matrix;
mod report;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codec::{decode, roundtrip_check, RoundTrip};
use crate::dataset_io::{check_constraints, load_dataset, parse_bindings, read_canonical, Dataset, Violation};
use crate::eval_core::{
    cross_check, CounterSnapshot, CrossStatus, Engine, EngineOptions, PredTrace, RefEngine, Truth, Witness, WitnessKind,
};
use crate::spec_lang::{load_model, Property, SpecModel};

pub use explain::{explain, ExplainError};
pub use harness::{parse_manifest, test_properties, FixtureResult, HarnessError, HarnessReport, ManifestEntry, VacuityFinding};
pub use matrix::{parse_requirements, render_matrix, trace_matrix, TraceRow};
pub use report::{render_records, render_text};

/// Version of the line-delimited record layout.
pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_REF_BOUND: usize = 2_000_000;
pub const SINGLE_CHAIN_WARNING: &str =
    "single-chain run: the reference engine was not used, verdicts are not cross-checked";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    Both,
    Main,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineChoice,
    pub ref_bound: usize,
    pub workers: usize,
    /// Evaluate only this property.
    pub property: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: EngineChoice::Both,
            ref_bound: DEFAULT_REF_BOUND,
            workers: 1,
            property: None,
        }
    }
}

/// An input file: its display name and contents.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Source {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Source {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    fn text(&self) -> Result<&str, String> {
        std::str::from_utf8(&self.bytes).map_err(|e| format!("{}: not UTF-8: {e}", self.name))
    }

    fn is_binary(&self) -> bool {
        self.bytes.starts_with(b"DVAL")
    }
}

/// Outcome classes, from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    PropertyFailure,
    WdError,
    Disagreement,
    RoundTripFailure,
    LoadError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::PropertyFailure => 1,
            Outcome::WdError => 2,
            Outcome::Disagreement => 3,
            Outcome::RoundTripFailure => 4,
            Outcome::LoadError => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::PropertyFailure => "FAIL (property failure)",
            Outcome::WdError => "FAIL (well-definedness error)",
            Outcome::Disagreement => "FAIL (engine disagreement)",
            Outcome::RoundTripFailure => "FAIL (round-trip failure)",
            Outcome::LoadError => "FAIL (load error)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub role: &'static str,
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub requirement: String,
    pub description: String,
    pub main: Truth,
    /// Reference verdict or the reason it is missing.
    pub reference: Option<String>,
    pub status: CrossStatus,
    /// Counterexample of the first falsified universal.
    pub witness: Option<Witness>,
    /// Operands or error message at the failing leaf.
    pub detail: Option<String>,
    #[serde(skip)]
    pub trace: PredTrace,
    #[serde(skip)]
    pub main_time: Duration,
    #[serde(skip)]
    pub reference_time: Option<Duration>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub properties: usize,
    pub pass: usize,
    pub fail: usize,
    pub wd_error: usize,
    pub disagree: usize,
    pub reference_incomplete: usize,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub engine: EngineChoice,
    pub warnings: Vec<String>,
    pub provenance: Vec<Provenance>,
    /// `None` for XML input.
    pub roundtrip: Option<Result<(), String>>,
    pub load_error: Option<String>,
    pub violations: Vec<Violation>,
    pub properties: Vec<PropertyResult>,
    pub summary: Summary,
    pub trace: Vec<TraceRow>,
    pub outcome: Outcome,
    pub counters: Option<CounterSnapshot>,
    pub total_time: Duration,
}

impl ValidationReport {
    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

fn provenance(role: &'static str, s: &Source) -> Provenance {
    let digest = Sha256::digest(&s.bytes);
    Provenance {
        role,
        name: s.name.clone(),
        sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        bytes: s.bytes.len(),
    }
}

/// Name of the root element of an XML document, without parsing it all.
fn root_name(xml: &str) -> Option<&str> {
    let mut rest = xml;
    loop {
        let i = rest.find('<')?;
        rest = &rest[i + 1..];
        match rest.chars().next()? {
            '?' | '!' => continue,
            _ => {
                let end = rest.find(|c: char| c.is_whitespace() || c == '>' || c == '/')?;
                return Some(&rest[..end]);
            }
        }
    }
}

/// First counterexample in a trace, depth first.
pub fn counterexample(t: &PredTrace) -> Option<&Witness> {
    match &t.witness {
        Some(w) if w.kind == WitnessKind::Counterexample && t.verdict == Truth::False => Some(w),
        _ => t.children.iter().find_map(counterexample),
    }
}

/// Universals of a trace whose domain was empty.
pub fn vacuous_nodes(t: &PredTrace) -> Vec<&PredTrace> {
    let mut out = Vec::new();
    fn walk<'t>(t: &'t PredTrace, out: &mut Vec<&'t PredTrace>) {
        if t.kind == "forall" && t.witness.as_ref().is_none_or(|w| w.instances == 0) {
            out.push(t);
        }
        for c in &t.children {
            walk(c, out);
        }
    }
    walk(t, &mut out);
    out
}

struct Prepared {
    model: SpecModel,
    data: Dataset,
}

fn prepare(
    model_src: &Source,
    bindings_src: &Source,
    data_src: &Source,
    report: &mut ValidationReport,
) -> Result<Prepared, Outcome> {
    let load_err = |report: &mut ValidationReport, msg: String| {
        report.load_error = Some(msg);
        Outcome::LoadError
    };
    let model = match model_src.text().and_then(|t| load_model(t).map_err(|e| format!("{}: {e}", model_src.name))) {
        Ok(m) => m,
        Err(e) => return Err(load_err(report, e)),
    };
    let bindings = match bindings_src
        .text()
        .and_then(|t| parse_bindings(t).map_err(|e| format!("{}: {e}", bindings_src.name)))
    {
        Ok(b) => b,
        Err(e) => return Err(load_err(report, e)),
    };
    let data = if data_src.is_binary() {
        match roundtrip_check(&data_src.bytes) {
            RoundTrip::Pass => report.roundtrip = Some(Ok(())),
            other => {
                let msg = match other {
                    RoundTrip::Decode(e) => format!("decode error: {e}"),
                    RoundTrip::Encode(e) => format!("re-encode error: {e}"),
                    RoundTrip::Mismatch { offset } => format!("re-encoded message differs at byte {offset}"),
                    RoundTrip::Pass => unreachable!(),
                };
                report.roundtrip = Some(Err(msg));
                return Err(Outcome::RoundTripFailure);
            }
        }
        let ds = decode(&data_src.bytes).expect("checked by the round trip");
        ds.conforms_to(&model, &bindings).map(|_| ds)
    } else {
        match data_src.text() {
            Err(e) => return Err(load_err(report, e)),
            Ok(xml) if root_name(xml) == Some("dataset") => {
                read_canonical(xml).and_then(|ds| ds.conforms_to(&model, &bindings).map(|_| ds))
            }
            Ok(xml) => load_dataset(xml, &bindings, &model),
        }
    };
    let data = match data {
        Ok(d) => d,
        Err(e) => return Err(load_err(report, format!("{}: {e}", data_src.name))),
    };
    let violations = check_constraints(&data, &model);
    if !violations.is_empty() {
        report.violations = violations;
        return Err(load_err(report, format!("{}: data constraints violated", data_src.name)));
    }
    Ok(Prepared { model, data })
}

fn evaluate<'a>(main: &Engine<'a>, reference: Option<&RefEngine<'a>>, p: &'a Property) -> PropertyResult {
    let v = cross_check(main, reference, &p.name).expect("property of the model");
    let witness = if v.main == Truth::False { counterexample(&v.trace).cloned() } else { None };
    let detail = match v.main {
        Truth::True => None,
        t => v.trace.find(t).and_then(|n| n.detail.clone()),
    };
    PropertyResult {
        name: p.name.clone(),
        requirement: p.requirement.clone(),
        description: p.description.clone(),
        main: v.main,
        reference: v.reference.as_ref().map(|r| match r {
            Ok(t) => t.to_string(),
            Err(e) => e.to_string(),
        }),
        status: v.status,
        witness,
        detail,
        trace: v.trace,
        main_time: v.main_time,
        reference_time: v.reference_time,
    }
}

/// Loads the inputs and evaluates every property. Load and round-trip
/// failures stop the run before any property is evaluated.
pub fn run(model_src: &Source, bindings_src: &Source, data_src: &Source, cfg: &RunConfig) -> ValidationReport {
    let start = Instant::now();
    let mut report = ValidationReport {
        engine: cfg.engine,
        warnings: Vec::new(),
        provenance: vec![
            provenance("model", model_src),
            provenance("bindings", bindings_src),
            provenance("data", data_src),
        ],
        roundtrip: None,
        load_error: None,
        violations: Vec::new(),
        properties: Vec::new(),
        summary: Summary::default(),
        trace: Vec::new(),
        outcome: Outcome::Pass,
        counters: None,
        total_time: Duration::ZERO,
    };
    if cfg.engine == EngineChoice::Main {
        report.warnings.push(SINGLE_CHAIN_WARNING.to_string());
    }
    let prepared = match prepare(model_src, bindings_src, data_src, &mut report) {
        Ok(p) => p,
        Err(outcome) => {
            report.outcome = outcome;
            report.total_time = start.elapsed();
            return report;
        }
    };
    let (model, data) = (&prepared.model, &prepared.data);
    let selected: Vec<&Property> = match &cfg.property {
        Some(name) => match model.property(name) {
            Some(p) => vec![p],
            None => {
                report.load_error = Some(format!("no property named `{name}`"));
                report.outcome = Outcome::LoadError;
                report.total_time = start.elapsed();
                return report;
            }
        },
        None => model.properties.iter().collect(),
    };

    let main = Engine::new(model, data, EngineOptions::default());
    let reference = (cfg.engine == EngineChoice::Both).then(|| RefEngine::new(model, data, cfg.ref_bound));
    main.warm_up();
    let results: Vec<PropertyResult> = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build() {
        Ok(pool) => pool.install(|| {
            selected
                .par_iter()
                .map(|p| evaluate(&main, reference.as_ref(), p))
                .collect()
        }),
        Err(_) => selected.iter().map(|p| evaluate(&main, reference.as_ref(), p)).collect(),
    };

    let mut s = Summary {
        properties: results.len(),
        ..Summary::default()
    };
    let mut outcome = Outcome::Pass;
    for r in &results {
        if r.status == CrossStatus::ReferenceIncomplete {
            s.reference_incomplete += 1;
        }
        let o = if r.status == CrossStatus::Disagree {
            s.disagree += 1;
            Outcome::Disagreement
        } else {
            match r.main {
                Truth::True => {
                    s.pass += 1;
                    Outcome::Pass
                }
                Truth::False => {
                    s.fail += 1;
                    Outcome::PropertyFailure
                }
                Truth::WdError => {
                    s.wd_error += 1;
                    Outcome::WdError
                }
            }
        };
        outcome = outcome.max(o);
    }
    report.trace = trace_matrix(model, None, Some(&results));
    report.summary = s;
    report.outcome = outcome;
    report.properties = results;
    report.counters = Some(main.counters.snapshot());
    report.total_time = start.elapsed();
    report
}

#[cfg(test)]
mod tests;
