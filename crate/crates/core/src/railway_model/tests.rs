use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::dataset_io::{check_constraints, Dataset};
use crate::eval_core::{cross_check, CrossStatus, Engine, EngineOptions, PredTrace, RefEngine, Truth, WitnessKind};
use crate::value::Value;

use super::*;

fn counterexample(t: &PredTrace) -> Option<&[(String, String)]> {
    if let Some(w) = &t.witness {
        if w.kind == WitnessKind::Counterexample && t.verdict == Truth::False {
            return Some(&w.bindings);
        }
    }
    t.children.iter().find_map(counterexample)
}

fn verdicts(data: &Dataset) -> BTreeMap<String, Truth> {
    let model = model();
    let main = Engine::new(model, data, EngineOptions::default());
    let reference = RefEngine::new(model, data, 1_000_000);
    model
        .properties
        .iter()
        .map(|p| {
            let v = cross_check(&main, Some(&reference), &p.name).unwrap();
            assert_eq!(v.status, CrossStatus::Agree, "{}: {:?}\n{}", p.name, v.reference, v.trace.render());
            (p.name.clone(), v.main)
        })
        .collect()
}

#[test]
fn bundled_model_loads() {
    let m = model();
    assert_eq!(m.properties.len(), 5);
    assert!(m.definition("r_next_block").is_some());
    assert_eq!(bindings().len(), m.constants.len() + m.sets.iter().filter(|s| s.elements.is_none()).count());
}

#[test]
fn nominal_fixture_passes() {
    let net = nominal();
    let data = load(&net).unwrap();
    assert!(check_constraints(&data, model()).is_empty());
    for (name, v) in verdicts(&data) {
        assert_eq!(v, Truth::True, "{name}");
    }
}

#[test]
fn next_block_relation_matches_topology() {
    let p = GenParams {
        blocks: 10,
        switches: 3,
        flips: 3,
        signals: 4,
    };
    let net = generate_network(11, &p).unwrap();
    let data = load(&net).unwrap();
    let main = Engine::new(model(), &data, EngineOptions::default());
    let rel = main.definition_value("r_next_block").unwrap().unwrap();
    let rel = main.force(&rel, Default::default()).unwrap();
    let key = |v: &Value| data.universes.atom_key(v.as_atom().unwrap());
    let mut got = BTreeSet::new();
    for q in rel.as_set().unwrap() {
        let (a, b) = q.as_pair().unwrap();
        let (b1, d1) = a.as_pair().unwrap();
        let (b2, d2) = b.as_pair().unwrap();
        got.insert((key(b1), key(d1), key(b2), key(d2)));
    }
    let mut want = BTreeSet::new();
    for b in 0..net.blocks.len() {
        for d in Dir::ALL {
            for (b2, d2) in oracle::next_states(&net, b, d) {
                want.insert((
                    NetworkSpec::block_key(b),
                    d.atom().to_string(),
                    NetworkSpec::block_key(b2),
                    d2.atom().to_string(),
                ));
            }
        }
    }
    assert_eq!(got, want);
}

#[test]
fn zone_matches_the_oracle() {
    let p = GenParams {
        blocks: 8,
        switches: 2,
        flips: 2,
        signals: 2,
    };
    let net = generate_network(5, &p).unwrap();
    let data = load(&net).unwrap();
    let main = Engine::new(model(), &data, EngineOptions::default());
    let zone = main.definition_value("f_zone").unwrap().unwrap();
    for b in 0..net.blocks.len() {
        for d in Dir::ALL {
            for (a, m) in [(0, 7), (3, 25), (net.blocks[b].len, 60)] {
                let arg = Value::pair(
                    Value::pair(
                        Value::pair(data.atom("t_block", &NetworkSpec::block_key(b)).unwrap(), data.atom("t_dir", d.atom()).unwrap()),
                        Value::int(a),
                    ),
                    Value::int(m),
                );
                let got = main.apply_value(&zone, &arg).unwrap();
                let mut got_pts: BTreeMap<String, BTreeSet<i64>> = BTreeMap::new();
                for q in got.as_set().unwrap() {
                    let (blk, x) = q.as_pair().unwrap();
                    got_pts
                        .entry(data.universes.atom_key(blk.as_atom().unwrap()))
                        .or_default()
                        .insert(x.as_int().unwrap().to_i64().unwrap());
                }
                let want: BTreeMap<String, BTreeSet<i64>> = oracle::zone(&net, b, d, a, m)
                    .into_iter()
                    .map(|(blk, ivs)| (NetworkSpec::block_key(blk), ivs.into_iter().flat_map(|(lo, hi)| lo..=hi).collect()))
                    .collect();
                assert_eq!(got_pts, want, "block {b} {d:?} at {a} within {m}");
            }
        }
    }
}

#[test]
fn each_mutation_breaks_only_its_property() {
    let net = nominal();
    let muts = mutations(&net);
    for prop in &model().properties {
        let n = muts.iter().filter(|m| m.property == prop.name).count();
        assert!((1..=3).contains(&n), "{}: {n} mutations", prop.name);
    }
    for m in &muts {
        let data = load(&m.network).unwrap();
        assert!(check_constraints(&data, model()).is_empty(), "{}", m.name);
        for (name, v) in verdicts(&data) {
            let want = if name == m.property { Truth::False } else { Truth::True };
            assert_eq!(v, want, "{}: {name}", m.name);
        }
        let engine = Engine::new(model(), &data, EngineOptions::default());
        let t = engine.trace_pred(&model().property(m.property).unwrap().pred);
        assert_eq!(counterexample(&t).unwrap(), m.witness.as_slice(), "{}", m.name);
    }
}

#[test]
fn shipped_fixtures_are_current() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/fixtures");
    let bless = std::env::var_os("DATAVAL_BLESS").is_some();
    for (name, content) in fixture_files() {
        let path = dir.join(&name);
        if bless {
            std::fs::write(&path, &content).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
        assert_eq!(on_disk, content, "{name} is stale; rerun with DATAVAL_BLESS=1");
    }
}
