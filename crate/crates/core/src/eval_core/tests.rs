use crate::dataset_io::{load_dataset, parse_bindings, Dataset};
use crate::spec_lang::{parse_model, typecheck, SpecModel};

use super::*;

const MODEL: &str = r#"
SETS t_node; t_col = {c_red, c_blue}
CONSTANTS
  r_next : t_node <-> t_node &
  f_weight : t_node --> NATURAL &
  f_col : t_node --> t_col &
  k_lim : INTEGER &
  k_src : t_node &
  k_dst : t_node
DEFINITIONS
  @desc "reachability"
  r_reach == closure1(r_next)
  @desc "two steps"
  r_two == iterate(r_next, 2)
  @desc "weight plus one"
  f_inc == %n.(n : t_node | f_weight(n) + 1)
  @desc "heavy nodes"
  s_heavy == {n | n : t_node & f_weight(n) > k_lim}
  @desc "weighted edges"
  r_w == {a, b, w | a : t_node & b : r_next[{a}] & w = f_weight(b)}
PROPERTIES
  @req R1 @desc "a reaches d"
  p_reach == k_src |-> k_dst : r_reach
  @req R2 @desc "d reaches nothing"
  p_sink == !x.(x : t_node => not(k_dst |-> x : r_reach))
  @req R3 @desc "every node has a successor"
  p_total == !x.(x : t_node => #y.(x |-> y : r_next))
  @req R4 @desc "lambda applied inside its domain"
  p_lambda == !x.(x : t_node => f_inc(x) = f_weight(x) + 1)
  @req R5 @desc "division by zero"
  p_div == !x.(x : t_node => f_weight(x) / 0 = 0)
  @req R6 @desc "heavy nodes are red"
  p_heavy == !x.(x : s_heavy => f_col(x) = c_red)
  @req R7 @desc "two-step image"
  p_two == card(r_two[{k_src}]) = 1
  @req R8 @desc "shortcut"
  p_short == k_src : t_node or 1 / 0 = 1
  @req R9 @desc "weighted edge image"
  p_w == r_w[r_next[{k_src}] * {k_dst}] = {} & ran(r_w) = {0, 3, 5}
  @req R10 @desc "typing as a predicate"
  p_typing == f_col : t_node --> t_col & r_next : t_node +-> t_node
"#;

const BINDINGS: &str = "t_node set /g/node/@id\n\
r_next relation /g/node/@id next/@ref\n\
f_weight function /g/node/@id @w\n\
f_col function /g/node/@id @col\n\
k_lim scalar /g/@lim\n\
k_src scalar /g/@src\n\
k_dst scalar /g/@dst\n";

const XML: &str = r#"<g lim="2" src="n_a" dst="n_d">
  <node id="n_a" w="1" col="c_red"><next ref="n_b"/></node>
  <node id="n_b" w="3" col="c_red"><next ref="n_c"/></node>
  <node id="n_c" w="5" col="c_blue"><next ref="n_d"/></node>
  <node id="n_d" w="0" col="c_blue"/>
</g>"#;

fn fixture() -> (SpecModel, Dataset) {
    let model = typecheck(&parse_model(MODEL).unwrap()).unwrap();
    let bindings = parse_bindings(BINDINGS).unwrap();
    let data = load_dataset(XML, &bindings, &model).unwrap();
    (model, data)
}

#[test]
fn verdicts_of_both_engines() {
    let (model, data) = fixture();
    let main = Engine::new(&model, &data, EngineOptions::default());
    let reference = RefEngine::new(&model, &data, 100_000);
    let expected = [
        ("p_reach", Truth::True),
        ("p_sink", Truth::True),
        ("p_total", Truth::False),
        ("p_lambda", Truth::True),
        ("p_div", Truth::WdError),
        ("p_heavy", Truth::False),
        ("p_two", Truth::True),
        ("p_short", Truth::True),
        ("p_w", Truth::True),
        ("p_typing", Truth::True),
    ];
    for (name, want) in expected {
        let v = cross_check(&main, Some(&reference), name).unwrap();
        assert_eq!(v.main, want, "{name}\n{}", v.trace.render());
        assert_eq!(v.status, CrossStatus::Agree, "{name}: {:?}", v.reference);
        check_trace(&v.trace).unwrap();
    }
}

#[test]
fn counterexample_is_reported() {
    let (model, data) = fixture();
    let main = Engine::new(&model, &data, EngineOptions::default());
    let t = main.trace_pred(&model.property("p_total").unwrap().pred);
    let w = t.witness.as_ref().unwrap();
    assert_eq!(w.kind, WitnessKind::Counterexample);
    assert_eq!(w.bindings, vec![("x".to_string(), "n_d".to_string())]);
    assert_eq!(t.children[0].verdict, Truth::False);
    assert_eq!(t.children[0].witness.as_ref().unwrap().kind, WitnessKind::Exhausted);

    let t = main.trace_pred(&model.property("p_div").unwrap().pred);
    let leaf = t.find(Truth::WdError).unwrap();
    assert!(leaf.detail.as_deref().unwrap().contains("by zero"), "{}", t.render());
}

#[test]
fn closure_membership_does_not_force() {
    let (model, data) = fixture();
    let main = Engine::new(&model, &data, EngineOptions::default());
    assert_eq!(main.holds(&model.property("p_reach").unwrap().pred), Truth::True);
    assert_eq!(main.counters.snapshot().sets_forced, 0);
    let reach = main.definition_value("r_reach").unwrap().unwrap();
    assert_eq!(reach.lazy_kind(), Some("closure1"));
    let forced = main.force(&reach, Default::default()).unwrap();
    assert_eq!(forced.as_set().unwrap().len(), 6);
}

#[test]
fn memoization_evaluates_each_definition_once() {
    let (model, data) = fixture();
    let main = Engine::new(&model, &data, EngineOptions::default());
    for p in &model.properties {
        main.holds(&p.pred);
        main.holds(&p.pred);
    }
    assert!(main.counters.snapshot().definitions_evaluated <= model.definitions.len() as u64);
}

#[test]
fn force_limit_is_a_capacity_error() {
    let (model, data) = fixture();
    let opts = EngineOptions {
        force_limit: 2,
        ..Default::default()
    };
    let main = Engine::new(&model, &data, opts);
    let reach = main.definition_value("r_reach").unwrap().unwrap();
    assert!(matches!(main.force(&reach, Default::default()), Err(EvalError::Capacity { .. })));
    let reference = RefEngine::new(&model, &data, 2);
    assert!(matches!(
        reference.holds(&model.property("p_reach").unwrap().pred),
        Err(RefError::Capacity { .. })
    ));
}
