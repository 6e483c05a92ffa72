use serde::Serialize;

use crate::eval_core::Truth;
use crate::spec_lang::SpecModel;

use super::PropertyResult;

/// One requirement tag and a property covering it. A tag from the
/// requirements list that no property covers has no property and is an
/// orphan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub requirement: String,
    pub property: Option<String>,
    pub verdict: Option<Truth>,
    pub orphan: bool,
}

/// Requirement tags, one per line; `#` starts a comment.
pub fn parse_requirements(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Rows sorted by tag, then property.
pub fn trace_matrix(model: &SpecModel, requirements: Option<&[String]>, results: Option<&[PropertyResult]>) -> Vec<TraceRow> {
    let verdict = |name: &str| results.and_then(|rs| rs.iter().find(|r| r.name == name)).map(|r| r.main);
    let mut rows: Vec<TraceRow> = model
        .properties
        .iter()
        .map(|p| TraceRow {
            requirement: p.requirement.clone(),
            property: Some(p.name.clone()),
            verdict: verdict(&p.name),
            orphan: false,
        })
        .collect();
    for tag in requirements.unwrap_or_default() {
        if !model.properties.iter().any(|p| &p.requirement == tag) {
            rows.push(TraceRow {
                requirement: tag.clone(),
                property: None,
                verdict: None,
                orphan: true,
            });
        }
    }
    rows.sort_by(|a, b| (&a.requirement, &a.property).cmp(&(&b.requirement, &b.property)));
    rows.dedup();
    rows
}

/// Fixed-width text table.
pub fn render_matrix(rows: &[TraceRow]) -> String {
    let w = rows.iter().map(|r| r.requirement.len()).max().unwrap_or(0).max("requirement".len());
    let pw = rows
        .iter()
        .map(|r| r.property.as_deref().map_or(0, str::len))
        .max()
        .unwrap_or(0)
        .max("property".len());
    let mut out = format!("{:<w$}  {:<pw$}  verdict\n", "requirement", "property");
    for r in rows {
        let verdict = match (r.orphan, r.verdict) {
            (true, _) => "ORPHAN".to_string(),
            (false, Some(v)) => v.to_string(),
            (false, None) => "-".to_string(),
        };
        out.push_str(&format!(
            "{:<w$}  {:<pw$}  {verdict}\n",
            r.requirement,
            r.property.as_deref().unwrap_or("-")
        ));
    }
    out
}
