use super::*;
use crate::codec::encode;
use crate::railway_model::{bindings, fixture_files, load, model, nominal, BINDINGS_SOURCE, MODEL_SOURCE};

fn fixture(name: &str) -> String {
    fixture_files().into_iter().find(|(n, _)| n == name).expect("fixture").1
}

fn run_on(data: Source, cfg: &RunConfig) -> ValidationReport {
    run(
        &Source::new("railway.model", MODEL_SOURCE),
        &Source::new("railway.bindings", BINDINGS_SOURCE),
        &data,
        cfg,
    )
}

fn without_timings(records: &str) -> String {
    records
        .lines()
        .take_while(|l| !l.contains("\"record\":\"timing\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn nominal_fixture_passes() {
    let r = run_on(Source::new("nominal.xml", fixture("nominal.xml")), &RunConfig::default());
    assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r));
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.summary.pass, model().properties.len());
    assert!(r.warnings.is_empty());
    assert!(r.properties.iter().all(|p| p.reference.as_deref() == Some("TRUE")));
}

#[test]
fn mutation_fails_with_counterexample() {
    let r = run_on(Source::new("kp_beyond_eps.xml", fixture("kp_beyond_eps.xml")), &RunConfig::default());
    assert_eq!(r.outcome, Outcome::PropertyFailure);
    assert_eq!(r.exit_code(), 1);
    let p = r.property("p_block_len_kp").unwrap();
    assert_eq!(p.main, Truth::False);
    assert_eq!(p.witness.as_ref().unwrap().bindings, vec![("b".to_string(), "b1".to_string())]);
    let text = render_text(&r);
    assert!(text.contains("counterexample: b = b1"), "{text}");
}

#[test]
fn binary_input_round_trips_before_evaluation() {
    let bytes = encode(&load(&nominal()).unwrap()).unwrap();
    let ok = run_on(Source::new("nominal.dval", bytes.clone()), &RunConfig::default());
    assert_eq!(ok.roundtrip, Some(Ok(())));
    assert_eq!(ok.outcome, Outcome::Pass, "{}", render_text(&ok));

    let mut flipped = bytes;
    let last = flipped.len() - 1;
    flipped[last] ^= 0x01;
    let bad = run_on(Source::new("flipped.dval", flipped), &RunConfig::default());
    assert_eq!(bad.outcome, Outcome::RoundTripFailure);
    assert_eq!(bad.exit_code(), 4);
    assert!(bad.properties.is_empty());
    assert!(matches!(&bad.roundtrip, Some(Err(m)) if m.contains("CRC") || m.contains("crc")), "{:?}", bad.roundtrip);
}

#[test]
fn canonical_xml_is_accepted() {
    let ds = load(&nominal()).unwrap();
    let xml = crate::dataset_io::write_canonical(&ds);
    let r = run_on(Source::new("nominal.canonical.xml", xml), &RunConfig::default());
    assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r));
}

#[test]
fn malformed_inputs_are_load_errors() {
    let r = run_on(Source::new("broken.xml", "<railway><block"), &RunConfig::default());
    assert_eq!(r.outcome, Outcome::LoadError);
    assert_eq!(r.exit_code(), 5);
    assert!(r.properties.is_empty());

    let r = run(
        &Source::new("bad.model", "MACHINE"),
        &Source::new("railway.bindings", BINDINGS_SOURCE),
        &Source::new("nominal.xml", fixture("nominal.xml")),
        &RunConfig::default(),
    );
    assert_eq!(r.outcome, Outcome::LoadError);
    assert!(r.load_error.as_deref().unwrap().starts_with("bad.model"));

    let cfg = RunConfig {
        property: Some("p_missing".into()),
        ..RunConfig::default()
    };
    let r = run_on(Source::new("nominal.xml", fixture("nominal.xml")), &cfg);
    assert_eq!(r.outcome, Outcome::LoadError);
}

#[test]
fn main_only_run_warns() {
    let cfg = RunConfig {
        engine: EngineChoice::Main,
        ..RunConfig::default()
    };
    let r = run_on(Source::new("nominal.xml", fixture("nominal.xml")), &cfg);
    assert_eq!(r.warnings, vec![SINGLE_CHAIN_WARNING.to_string()]);
    assert!(r.properties.iter().all(|p| p.reference.is_none()));
    assert!(render_text(&r).starts_with("WARNING:"));
    assert!(render_records(&r).lines().nth(1).unwrap().contains("\"record\":\"warning\""));
}

#[test]
fn tight_reference_bound_is_not_a_failure() {
    let cfg = RunConfig {
        ref_bound: 2,
        ..RunConfig::default()
    };
    let r = run_on(Source::new("nominal.xml", fixture("nominal.xml")), &cfg);
    assert_eq!(r.outcome, Outcome::Pass);
    assert!(r.summary.reference_incomplete > 0);
}

#[test]
fn records_are_deterministic_and_independent_of_workers() {
    let data = Source::new("sig_prot_upstream.xml", fixture("sig_prot_upstream.xml"));
    let one = RunConfig {
        workers: 1,
        ..RunConfig::default()
    };
    let four = RunConfig {
        workers: 4,
        ..RunConfig::default()
    };
    let a = without_timings(&render_records(&run_on(data.clone(), &one)));
    let b = without_timings(&render_records(&run_on(data.clone(), &one)));
    let c = without_timings(&render_records(&run_on(data, &four)));
    assert_eq!(a, b);
    assert_eq!(a, c);
    for line in a.lines() {
        serde_json::from_str::<serde_json::Value>(line).expect("each record is JSON");
    }
    assert!(a.lines().last().unwrap().contains("\"exit\":1"));
}

#[test]
fn explain_shows_tree_and_definitions() {
    let r = run_on(Source::new("sig_prot_behind.xml", fixture("sig_prot_behind.xml")), &RunConfig::default());
    let flat = explain(&r, model(), "p_sig_prot_afterwards", 0).unwrap();
    let deep = explain(&r, model(), "p_sig_prot_afterwards", 2).unwrap();
    assert!(flat.contains("main: FALSE"));
    assert!(!flat.contains("definitions, level"));
    assert!(deep.contains("definitions, level 1"));
    assert!(deep.contains("f_pos_afterwards"));
    assert_eq!(
        explain(&r, model(), "p_nope", 1),
        Err(ExplainError::UnknownProperty("p_nope".into()))
    );
}

#[test]
fn bundled_fixtures_satisfy_the_harness() {
    let files = fixture_files();
    let manifest = parse_manifest(&files.iter().find(|(n, _)| n == "manifest").unwrap().1).unwrap();
    let read = |name: &str| {
        files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, x)| x.clone())
            .ok_or_else(|| "missing".to_string())
    };
    let report = test_properties(model(), bindings(), &manifest, &read, DEFAULT_REF_BOUND).unwrap();
    assert!(report.passed(), "{}", report.render());
}

#[test]
fn harness_reports_gaps() {
    let files = fixture_files();
    let read = |name: &str| {
        files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, x)| x.clone())
            .ok_or_else(|| "missing".to_string())
    };
    let only_nominal = parse_manifest("nominal.xml - -\n").unwrap();
    let report = test_properties(model(), bindings(), &only_nominal, &read, DEFAULT_REF_BOUND).unwrap();
    assert!(!report.passed());
    assert_eq!(report.untested.len(), model().properties.len());

    let wrong = parse_manifest("nominal.xml\nkp_beyond_eps.xml p_block_len_kp b=b2\n").unwrap();
    let report = test_properties(model(), bindings(), &wrong, &read, DEFAULT_REF_BOUND).unwrap();
    assert!(report.fixtures[1].problems[0].contains("expected b=b2"), "{:?}", report.fixtures[1]);

    // the nominal fixture targets nothing, so every property it falsifies is a problem
    let swapped = parse_manifest("kp_beyond_eps.xml -\n").unwrap();
    let report = test_properties(model(), bindings(), &swapped, &read, DEFAULT_REF_BOUND).unwrap();
    assert!(report.fixtures[0].problems.iter().any(|p| p.contains("p_block_len_kp")));

    assert_eq!(
        test_properties(model(), bindings(), &[], &read, DEFAULT_REF_BOUND).unwrap_err(),
        HarnessError::NoNominal
    );
    let unknown = parse_manifest("nominal.xml\nx.xml p_nope\n").unwrap();
    assert!(matches!(
        test_properties(model(), bindings(), &unknown, &read, DEFAULT_REF_BOUND),
        Err(HarnessError::UnknownProperty { .. })
    ));
    assert!(matches!(parse_manifest("a b c=d e"), Err(HarnessError::Manifest { line: 1, .. })));
}

#[test]
fn vacuous_universal_is_flagged() {
    let mut net = nominal();
    net.signals.clear();
    let xml = net.to_xml();
    let manifest = parse_manifest("silent.xml\n").unwrap();
    let read = |_: &str| Ok(xml.clone());
    let report = test_properties(model(), bindings(), &manifest, &read, DEFAULT_REF_BOUND).unwrap();
    assert!(report.fixtures[0].problems.is_empty(), "{}", report.render());
    assert!(!report.vacuity.is_empty());
    assert!(report.vacuity.iter().any(|v| v.property == "p_sig_abs_in_block"), "{:?}", report.vacuity);
    assert!(report.render().contains("VACUOUS p_sig_abs_in_block on silent.xml"));
    assert!(!report.passed());
}

#[test]
fn root_name_skips_prolog() {
    assert_eq!(root_name("<?xml version=\"1.0\"?>\n<!-- c -->\n<dataset a=\"1\">"), Some("dataset"));
    assert_eq!(root_name("<railway/>"), Some("railway"));
    assert_eq!(root_name("no markup"), None);
}
