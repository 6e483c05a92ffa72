use serde_json::{json, Value as Json};

use super::matrix::render_matrix;
use super::{CrossStatus, Truth, ValidationReport, REPORT_SCHEMA};

fn ms(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Human-readable report.
pub fn render_text(r: &ValidationReport) -> String {
    let mut out = String::new();
    for w in &r.warnings {
        out.push_str(&format!("WARNING: {w}\n"));
    }
    for p in &r.provenance {
        out.push_str(&format!("{:<9} {} ({} bytes, sha256 {})\n", p.role, p.name, p.bytes, p.sha256));
    }
    match &r.roundtrip {
        Some(Ok(())) => out.push_str("round-trip: pass\n"),
        Some(Err(e)) => out.push_str(&format!("round-trip: FAIL: {e}\n")),
        None => {}
    }
    if let Some(e) = &r.load_error {
        out.push_str(&format!("load error: {e}\n"));
    }
    for v in &r.violations {
        out.push_str(&format!("  violation {v}\n"));
    }
    for p in &r.properties {
        let tag = match (p.status, p.main) {
            (CrossStatus::Disagree, _) => "DISAGREE",
            (_, Truth::True) => "PASS",
            (_, Truth::False) => "FAIL",
            (_, Truth::WdError) => "WD-ERROR",
        };
        out.push_str(&format!("{tag:<8} {} [{}] main {}", p.name, p.requirement, p.main));
        if let Some(reference) = &p.reference {
            out.push_str(&format!(", reference {reference} ({})", p.status));
        }
        out.push_str(&format!("  {} ms", ms(p.main_time)));
        if let Some(t) = p.reference_time {
            out.push_str(&format!(" / {} ms", ms(t)));
        }
        out.push('\n');
        if let Some(w) = &p.witness {
            let b: Vec<String> = w.bindings.iter().map(|(n, v)| format!("{n} = {v}")).collect();
            out.push_str(&format!("         counterexample: {}\n", b.join(", ")));
        }
        if let Some(d) = &p.detail {
            out.push_str(&format!("         at: {d}\n"));
        }
    }
    if !r.trace.is_empty() {
        out.push_str("\ntraceability:\n");
        out.push_str(&render_matrix(&r.trace));
    }
    let s = &r.summary;
    out.push_str(&format!(
        "\n{} properties: {} pass, {} fail, {} wd-error, {} disagree, {} reference-incomplete\n",
        s.properties, s.pass, s.fail, s.wd_error, s.disagree, s.reference_incomplete
    ));
    if s.reference_incomplete > 0 {
        out.push_str("note: the reference engine hit its bound on some properties; those verdicts are not cross-checked\n");
    }
    out.push_str(&format!(
        "result: {} (exit {}) in {} ms\n",
        r.outcome.label(),
        r.exit_code(),
        ms(r.total_time)
    ));
    out
}

/// Line-delimited JSON records. Every record before the first `timing`
/// record depends only on the inputs.
pub fn render_records(r: &ValidationReport) -> String {
    let mut recs: Vec<Json> = vec![json!({"record": "header", "schema": REPORT_SCHEMA, "engine": r.engine})];
    for w in &r.warnings {
        recs.push(json!({"record": "warning", "message": w}));
    }
    for p in &r.provenance {
        recs.push(json!({"record": "input", "role": p.role, "name": p.name, "bytes": p.bytes, "sha256": p.sha256}));
    }
    match &r.roundtrip {
        Some(Ok(())) => recs.push(json!({"record": "roundtrip", "result": "pass"})),
        Some(Err(e)) => recs.push(json!({"record": "roundtrip", "result": "fail", "message": e})),
        None => {}
    }
    if let Some(e) = &r.load_error {
        recs.push(json!({"record": "load-error", "message": e}));
    }
    for v in &r.violations {
        recs.push(json!({"record": "violation", "violation": v}));
    }
    for p in &r.properties {
        recs.push(json!({"record": "property", "property": p}));
    }
    for row in &r.trace {
        recs.push(json!({"record": "trace", "row": row}));
    }
    recs.push(json!({
        "record": "summary",
        "summary": r.summary,
        "outcome": r.outcome,
        "exit": r.exit_code(),
    }));
    for p in &r.properties {
        recs.push(json!({
            "record": "timing",
            "property": p.name,
            "main_ms": ms(p.main_time),
            "reference_ms": p.reference_time.map(ms),
        }));
    }
    recs.push(json!({"record": "timing", "total_ms": ms(r.total_time), "counters": r.counters}));
    let mut out = String::new();
    for rec in recs {
        out.push_str(&rec.to_string());
        out.push('\n');
    }
    out
}
