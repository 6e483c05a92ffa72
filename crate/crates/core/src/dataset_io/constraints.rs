//! Load-time checking of typing conjuncts and residual constraints.

use std::fmt;

use serde::Serialize;

use crate::eval_core::{Engine, EngineOptions, Truth, Witness};
use crate::spec_lang::{free_identifiers_pred, pred_to_string, BinOp, CmpOp, ExprKind, Loc, Pred, PredKind, SpecModel};
use crate::value::relation_slice;

use super::Dataset;

/// A constraint predicate that does not hold on a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Constants mentioned by the predicate, in declaration order.
    pub constants: Vec<String>,
    pub predicate: String,
    pub line: u32,
    pub col: u32,
    pub verdict: Truth,
    pub witness: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} {} [{}] is {}: {}",
            self.line,
            self.col,
            self.constants.join(", "),
            self.predicate,
            self.verdict,
            self.witness
        )
    }
}

/// Evaluates the typing conjunct of every constant, then the residual
/// constraints, and returns those that are not TRUE.
pub fn check_constraints(dataset: &Dataset, model: &SpecModel) -> Vec<Violation> {
    let engine = Engine::new(model, dataset, EngineOptions::default());
    let mut out = Vec::new();
    let typing = model.constants.iter().map(|c| &c.typing);
    for p in typing.chain(model.constraints.iter()) {
        if let Some(v) = check_one(&engine, model, p) {
            out.push(v);
        }
    }
    out
}

fn check_one<'a>(engine: &Engine<'a>, model: &'a SpecModel, p: &'a Pred) -> Option<Violation> {
    let trace = engine.trace_pred(p);
    if trace.verdict == Truth::True {
        return None;
    }
    let free = free_identifiers_pred(p);
    let constants = model
        .constants
        .iter()
        .filter(|c| free.contains(&c.name))
        .map(|c| c.name.clone())
        .collect();
    let node = trace.find(trace.verdict).unwrap_or(&trace);
    let witness = arrow_witness(engine, p)
        .or_else(|| trace.witness.as_ref().and_then(bindings))
        .or_else(|| node.witness.as_ref().and_then(bindings))
        .or_else(|| node.detail.clone())
        .unwrap_or_else(|| node.text.clone());
    Some(Violation {
        constants,
        predicate: pred_to_string(p),
        line: p.loc.line,
        col: p.loc.col,
        verdict: trace.verdict,
        witness,
    })
}

fn bindings(w: &Witness) -> Option<String> {
    if w.bindings.is_empty() {
        return None;
    }
    Some(w.bindings.iter().map(|(n, v)| format!("{n} = {v}")).collect::<Vec<_>>().join(", "))
}

/// For `f : A op B` with an arrow `op`, the first element breaking it: a
/// pair outside `A * B`, a duplicated domain element or a missing one.
fn arrow_witness<'a>(engine: &Engine<'a>, p: &'a Pred) -> Option<String> {
    let PredKind::Cmp(CmpOp::Member, f, set) = &p.kind else {
        return None;
    };
    let ExprKind::Binary(op, a, b) = &set.kind else {
        return None;
    };
    if !op.is_arrow() {
        return None;
    }
    let loc = Loc::default();
    let fv = engine.eval_value(f).ok()?;
    let pairs = fv.as_set()?;
    let av = engine.eval_expr(a).ok()?;
    let bv = engine.eval_expr(b).ok()?;
    for q in pairs {
        let (x, y) = q.as_pair()?;
        if !engine.contains(&av, x, loc).ok()? {
            return Some(format!("{} is outside the domain set", engine.render(x)));
        }
        if !engine.contains(&bv, y, loc).ok()? {
            return Some(format!("image {} of {} is outside the range set", engine.render(y), engine.render(x)));
        }
    }
    if *op == BinOp::Rel {
        return None;
    }
    for w in pairs.windows(2) {
        let (x, _) = w[0].as_pair()?;
        let (y, _) = w[1].as_pair()?;
        if x == y {
            return Some(format!("{} has several images", engine.render(x)));
        }
    }
    if *op == BinOp::TFun {
        let dom = engine.force(&av, loc).ok()?;
        for x in dom.as_set()? {
            if relation_slice(pairs, x).is_empty() {
                return Some(format!("{} has no image", engine.render(x)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset_io::{load_dataset, parse_bindings};
    use crate::spec_lang::{parse_model, typecheck};

    const MODEL: &str = "SETS t_block; t_frontier\n\
        CONSTANTS f_orig : t_block --> t_frontier & f_len : t_block --> NATURAL1 & k_eps : INTEGER & k_eps >= 0";
    const BINDINGS: &str = "t_block set /n/block/@id\n\
        t_frontier set /n/frontier/@id\n\
        f_orig function /n/block/@id @orig\n\
        f_len function /n/block/@id @len\n\
        k_eps scalar /n/@eps\n";

    fn violations(xml: &str) -> Vec<Violation> {
        let model = typecheck(&parse_model(MODEL).unwrap()).unwrap();
        let data = load_dataset(xml, &parse_bindings(BINDINGS).unwrap(), &model).unwrap();
        check_constraints(&data, &model)
    }

    #[test]
    fn satisfied_constraints_give_no_violation() {
        let xml = r#"<n eps="1"><frontier id="fr1"/><block id="b1" orig="fr1" len="5"/></n>"#;
        assert!(violations(xml).is_empty());
    }

    #[test]
    fn missing_image_names_the_block() {
        let xml = r#"<n eps="1"><frontier id="fr1"/><block id="b1" orig="fr1" len="5"/><block id="b2" len="5"/></n>"#;
        let v = violations(xml);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constants, vec!["f_orig"]);
        assert_eq!(v[0].verdict, Truth::False);
        assert_eq!(v[0].witness, "b2 has no image");
    }

    #[test]
    fn range_and_residual_violations() {
        let xml = r#"<n eps="-1"><frontier id="fr1"/><block id="b1" orig="fr1" len="0"/></n>"#;
        let v = violations(xml);
        assert_eq!(v.len(), 2, "{v:?}");
        assert_eq!(v[0].witness, "image 0 of b1 is outside the range set");
        assert_eq!(v[1].constants, vec!["k_eps"]);
        assert!(v[1].witness.contains("-1 >= 0"), "{}", v[1].witness);
    }

    #[test]
    fn empty_universe_is_vacuous() {
        assert!(violations(r#"<n eps="0"/>"#).is_empty());
    }
}
