use std::fmt::Write;

use serde::Serialize;

use super::Truth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// Binding that falsifies a universal.
    Counterexample,
    /// Binding that satisfies an existential.
    Example,
    /// First instance of a universal that held.
    Sample,
    /// An existential with no satisfying binding.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Variable name and rendered value, in binder order.
    pub bindings: Vec<(String, String)>,
    /// Instances of the quantifier body evaluated.
    pub instances: u64,
}

/// Evaluated sub-predicates, for drill-down on failures.
///
/// Quantifier nodes keep at most one child: the counterexample or witness
/// instance, or a sample instance when there is none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredTrace {
    pub kind: String,
    pub text: String,
    pub line: u32,
    pub col: u32,
    pub verdict: Truth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PredTrace>,
}

impl PredTrace {
    /// Indented tree, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let _ = write!(
            out,
            "{:indent$}{:<8} [{}:{}] {}",
            "",
            self.verdict.to_string(),
            self.line,
            self.col,
            self.text,
            indent = depth * 2
        );
        if let Some(w) = &self.witness {
            let kind = match w.kind {
                WitnessKind::Counterexample => "counterexample",
                WitnessKind::Example => "witness",
                WitnessKind::Sample => "first instance",
                WitnessKind::Exhausted => "no witness",
            };
            let binds: Vec<String> = w.bindings.iter().map(|(n, v)| format!("{n} = {v}")).collect();
            let _ = write!(out, "  -- {kind}");
            if !binds.is_empty() {
                let _ = write!(out, ": {}", binds.join(", "));
            }
            let _ = write!(out, " ({} instance{})", w.instances, if w.instances == 1 { "" } else { "s" });
        }
        if let Some(d) = &self.detail {
            let _ = write!(out, "  -- {d}");
        }
        out.push('\n');
        for c in &self.children {
            c.render_into(out, depth + 1);
        }
    }

    /// Depth-first search for the first node with the given verdict.
    pub fn find(&self, verdict: Truth) -> Option<&PredTrace> {
        if self.children.is_empty() && self.verdict == verdict {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(verdict)).or({
            if self.verdict == verdict {
                Some(self)
            } else {
                None
            }
        })
    }
}

/// Recomputes every node's verdict from its children and reports the first
/// node where it differs from the recorded one.
pub fn check_trace(t: &PredTrace) -> Result<(), String> {
    for c in &t.children {
        check_trace(c)?;
    }
    let v: Vec<Truth> = t.children.iter().map(|c| c.verdict).collect();
    let expected = match (t.kind.as_str(), v.as_slice()) {
        (_, _) if t.children.is_empty() => return Ok(()),
        ("and", [a]) => match a {
            Truth::True => None,
            other => Some(*other),
        },
        ("and", [_, b]) => Some(*b),
        ("or", [a]) => match a {
            Truth::False => None,
            other => Some(*other),
        },
        ("or", [_, b]) => Some(*b),
        ("implies", [a]) => match a {
            Truth::False => Some(Truth::True),
            Truth::WdError => Some(Truth::WdError),
            Truth::True => None,
        },
        ("implies", [_, b]) => Some(*b),
        ("equiv", [a, b]) => Some(match (a, b) {
            (Truth::WdError, _) | (_, Truth::WdError) => Truth::WdError,
            _ => Truth::from_bool(a == b),
        }),
        ("equiv", [Truth::WdError]) => Some(Truth::WdError),
        ("not", [a]) => Some(match a {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::WdError => Truth::WdError,
        }),
        ("forall", [a]) | ("exists", [a]) => Some(*a),
        _ => return Err(format!("node `{}` at {}:{} has an unexpected shape", t.kind, t.line, t.col)),
    };
    match expected {
        Some(e) if e == t.verdict => Ok(()),
        Some(e) => Err(format!(
            "node `{}` at {}:{} records {} but its children give {}",
            t.kind, t.line, t.col, t.verdict, e
        )),
        None => Err(format!("node `{}` at {}:{} stopped early without a reason", t.kind, t.line, t.col)),
    }
}
