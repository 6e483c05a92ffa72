use serde::Serialize;
use thiserror::Error;

use crate::dataset_io::{check_constraints, load_dataset, BindingSpec};
use crate::eval_core::{cross_check, CrossStatus, Engine, EngineOptions, RefEngine, Truth};
use crate::spec_lang::SpecModel;

use super::{counterexample, vacuous_nodes};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HarnessError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("fixture `{fixture}` targets `{property}`, which the model does not define")]
    UnknownProperty { fixture: String, property: String },
    #[error("the manifest lists no nominal fixture")]
    NoNominal,
    #[error("fixture `{fixture}`: {message}")]
    Fixture { fixture: String, message: String },
}

/// One manifest line: a fixture file, the property it must falsify (none
/// for a nominal fixture) and the expected counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub fixture: String,
    pub target: Option<String>,
    pub witness: Vec<(String, String)>,
}

/// Lines of `fixture target-property counterexample`, `-` for an absent
/// field, counterexample as `name=value` pairs separated by commas.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| HarnessError::Manifest {
            line: i + 1,
            message: message.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() > 3 {
            return Err(err("expected at most three fields"));
        }
        let target = fields.get(1).filter(|t| **t != "-").map(|t| t.to_string());
        let mut witness = Vec::new();
        if let Some(w) = fields.get(2).filter(|w| **w != "-") {
            for b in w.split(',') {
                let (n, v) = b.split_once('=').ok_or_else(|| err("counterexample bindings are name=value"))?;
                witness.push((n.to_string(), v.to_string()));
            }
        }
        if target.is_none() && !witness.is_empty() {
            return Err(err("a nominal fixture has no counterexample"));
        }
        out.push(ManifestEntry {
            fixture: fields[0].to_string(),
            target,
            witness,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureResult {
    pub fixture: String,
    pub target: Option<String>,
    pub verdicts: Vec<(String, Truth)>,
    /// Empty when the fixture behaves as the manifest says.
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VacuityFinding {
    pub fixture: String,
    pub property: String,
    /// The universal whose domain was empty.
    pub quantifier: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub fixtures: Vec<FixtureResult>,
    pub vacuity: Vec<VacuityFinding>,
    /// Properties no mutation fixture falsifies.
    pub untested: Vec<String>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.fixtures.iter().all(|f| f.problems.is_empty()) && self.vacuity.is_empty() && self.untested.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.fixtures {
            let status = if f.problems.is_empty() { "ok  " } else { "FAIL" };
            let target = f.target.as_deref().unwrap_or("nominal");
            out.push_str(&format!("{status} {} ({target})\n", f.fixture));
            for p in &f.problems {
                out.push_str(&format!("       {p}\n"));
            }
        }
        for v in &self.vacuity {
            out.push_str(&format!(
                "VACUOUS {} on {}: empty domain in {}\n",
                v.property, v.fixture, v.quantifier
            ));
        }
        for p in &self.untested {
            out.push_str(&format!("UNTESTED {p}: no mutation fixture\n"));
        }
        out.push_str(if self.passed() { "harness: PASS\n" } else { "harness: FAIL\n" });
        out
    }
}

/// Runs every fixture of a manifest through both engines. `read` returns
/// the contents of a fixture file.
pub fn test_properties(
    model: &SpecModel,
    bindings: &[BindingSpec],
    manifest: &[ManifestEntry],
    read: &dyn Fn(&str) -> Result<String, String>,
    ref_bound: usize,
) -> Result<HarnessReport, HarnessError> {
    if !manifest.iter().any(|e| e.target.is_none()) {
        return Err(HarnessError::NoNominal);
    }
    for e in manifest {
        if let Some(t) = &e.target {
            if model.property(t).is_none() {
                return Err(HarnessError::UnknownProperty {
                    fixture: e.fixture.clone(),
                    property: t.clone(),
                });
            }
        }
    }
    let mut fixtures = Vec::new();
    let mut vacuity = Vec::new();
    for e in manifest {
        let fixture_err = |message: String| HarnessError::Fixture {
            fixture: e.fixture.clone(),
            message,
        };
        let xml = read(&e.fixture).map_err(fixture_err)?;
        let mut result = FixtureResult {
            fixture: e.fixture.clone(),
            target: e.target.clone(),
            verdicts: Vec::new(),
            problems: Vec::new(),
        };
        let data = match load_dataset(&xml, bindings, model) {
            Ok(d) => d,
            Err(err) => {
                result.problems.push(format!("load error: {err}"));
                fixtures.push(result);
                continue;
            }
        };
        for v in check_constraints(&data, model) {
            result.problems.push(format!("constraint violated: {v}"));
        }
        let main = Engine::new(model, &data, EngineOptions::default());
        let reference = RefEngine::new(model, &data, ref_bound);
        for p in &model.properties {
            let v = cross_check(&main, Some(&reference), &p.name).expect("property of the model");
            result.verdicts.push((p.name.clone(), v.main));
            if v.status == CrossStatus::Disagree {
                result.problems.push(format!("{}: engines disagree", p.name));
            }
            let targeted = e.target.as_deref() == Some(p.name.as_str());
            let want = if targeted { Truth::False } else { Truth::True };
            if v.main != want {
                let role = if targeted { "target" } else { "untargeted property" };
                result.problems.push(format!("{role} {} is {}, expected {want}", p.name, v.main));
            }
            if targeted && v.main == Truth::False && !e.witness.is_empty() {
                let got = counterexample(&v.trace).map(|w| w.bindings.clone()).unwrap_or_default();
                if got != e.witness {
                    let show = |b: &[(String, String)]| b.iter().map(|(n, x)| format!("{n}={x}")).collect::<Vec<_>>().join(",");
                    result.problems.push(format!(
                        "counterexample is {}, expected {}",
                        if got.is_empty() { "-".to_string() } else { show(&got) },
                        show(&e.witness)
                    ));
                }
            }
            if e.target.is_none() {
                for node in vacuous_nodes(&v.trace) {
                    vacuity.push(VacuityFinding {
                        fixture: e.fixture.clone(),
                        property: p.name.clone(),
                        quantifier: node.text.clone(),
                    });
                }
            }
        }
        fixtures.push(result);
    }
    let untested = model
        .properties
        .iter()
        .filter(|p| !manifest.iter().any(|e| e.target.as_deref() == Some(p.name.as_str())))
        .map(|p| p.name.clone())
        .collect();
    Ok(HarnessReport {
        fixtures,
        vacuity,
        untested,
    })
}
