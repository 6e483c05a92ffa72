use std::collections::BTreeSet;

use thiserror::Error;

use crate::spec_lang::{expr_to_string, free_identifiers, free_identifiers_pred, referenced_definitions, SpecModel};

use super::ValidationReport;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExplainError {
    #[error("no property named `{0}` in the report")]
    UnknownProperty(String),
}

/// Evaluation tree of a property, followed by the definitions it uses
/// down to `expand` levels.
pub fn explain(report: &ValidationReport, model: &SpecModel, property: &str, expand: usize) -> Result<String, ExplainError> {
    let r = report
        .property(property)
        .ok_or_else(|| ExplainError::UnknownProperty(property.to_string()))?;
    let mut out = format!("{} [{}] {}\n", r.name, r.requirement, r.description);
    out.push_str(&format!("main: {}", r.main));
    if let Some(reference) = &r.reference {
        out.push_str(&format!(", reference: {reference} ({})", r.status));
    }
    out.push('\n');
    out.push_str(&r.trace.render());

    let Some(p) = model.property(property) else {
        return Ok(out);
    };
    let mut seen = BTreeSet::new();
    let mut level = referenced_definitions(model, &free_identifiers_pred(&p.pred));
    for depth in 1..=expand {
        level.retain(|d| seen.insert(d.clone()));
        if level.is_empty() {
            break;
        }
        out.push_str(&format!("\ndefinitions, level {depth}:\n"));
        let mut next = BTreeSet::new();
        for name in &level {
            let d = model.definition(name).expect("referenced definition");
            out.push_str(&format!("  {} -- {}\n    {}\n", d.name, d.description, expr_to_string(&d.body)));
            next.extend(free_identifiers(&d.body));
        }
        level = referenced_definitions(model, &next);
    }
    Ok(out)
}
