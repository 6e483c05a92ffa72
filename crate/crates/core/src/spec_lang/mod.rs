//! Front end for the model language: lexer, parser, name resolution,
//! pretty-printer and type checker.
//!
//! A model file has up to four clauses, in this order:
//!
//! ```text
//! SETS        t_block; t_dir = {c_upward, c_downward}
//! CONSTANTS   f_len : t_block --> NATURAL1 & k_eps : INTEGER
//! DEFINITIONS @desc "..." name == <expression>
//! PROPERTIES  @req TAG @desc "..." name == <predicate>
//! ```

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typecheck;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use parser::{parse_expr, parse_pred};
pub use pretty::{expr_to_string, pred_to_string};
pub use typecheck::{check_pred_in, type_of_expr, typecheck, TypeError, TypeErrors};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub loc: Loc,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub fn new(loc: Loc, expected: &str, found: &str) -> Self {
        ParseError {
            loc,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: expected {}, found {}", self.loc, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("duplicate name `{name}` at {loc}")]
    Duplicate { name: String, loc: Loc },
    #[error("undeclared identifier `{name}` at {loc}")]
    Undeclared { name: String, loc: Loc },
    #[error("definition `{definition}` refers to `{name}` at {loc}, which is not defined before it")]
    DefinitionCycle {
        definition: String,
        name: String,
        loc: Loc,
    },
    #[error("`{name}` at {loc} shadows an existing name")]
    Shadowing { name: String, loc: Loc },
    #[error("{what} `{name}` at {loc} is missing its {annotation} annotation")]
    MissingAnnotation {
        what: &'static str,
        name: String,
        annotation: &'static str,
        loc: Loc,
    },
    #[error("requirement tag of property `{name}` at {loc} is empty")]
    EmptyRequirement { name: String, loc: Loc },
    #[error(transparent)]
    Type(#[from] TypeErrors),
}

/// Parses, resolves and type-checks a model file.
pub fn load_model(source: &str) -> Result<SpecModel, ModelError> {
    Ok(typecheck(&parse_model(source)?)?)
}

/// Parses and resolves a model file. The result is not yet type-checked.
pub fn parse_model(source: &str) -> Result<SpecModel, ModelError> {
    let raw = parser::Parser::new(source)?.parse_model_syntax()?;
    let mut globals: HashSet<String> = HashSet::new();
    let declare = |name: &str, loc: Loc, globals: &mut HashSet<String>| {
        if globals.insert(name.to_string()) {
            Ok(())
        } else {
            Err(ModelError::Duplicate {
                name: name.to_string(),
                loc,
            })
        }
    };

    for set in &raw.sets {
        declare(&set.name, set.loc, &mut globals)?;
        for el in set.elements.iter().flatten() {
            declare(el, set.loc, &mut globals)?;
        }
    }

    // Split the CONSTANTS clause into typing conjuncts and residual constraints.
    let mut constants = Vec::new();
    let mut constraints = Vec::new();
    if let Some(clause) = &raw.constants {
        for conj in clause.conjuncts() {
            let typed_name = match &conj.kind {
                PredKind::Cmp(CmpOp::Member | CmpOp::Subset, lhs, _) => lhs
                    .as_ident()
                    .filter(|n| !globals.contains(*n))
                    .map(str::to_string),
                _ => None,
            };
            match typed_name {
                Some(name) => {
                    globals.insert(name.clone());
                    constants.push(ConstantDecl {
                        name,
                        typing: conj.clone(),
                        ty: None,
                    });
                }
                None => constraints.push(conj.clone()),
            }
        }
    }

    let base: HashSet<String> = globals.clone();
    for c in &constants {
        resolve_pred(&c.typing, &base, &mut Vec::new(), &Scope::Constants)?;
    }
    for p in &constraints {
        resolve_pred(p, &base, &mut Vec::new(), &Scope::Constants)?;
    }

    let all_definitions: HashSet<String> = raw.definitions.iter().map(|d| d.1.clone()).collect();
    let mut definitions = Vec::new();
    for (annots, name, body, loc) in raw.definitions {
        declare(&name, loc, &mut globals)?;
        let desc = annots.desc.ok_or_else(|| ModelError::MissingAnnotation {
            what: "definition",
            name: name.clone(),
            annotation: "@desc",
            loc,
        })?;
        let visible: HashSet<String> = globals.iter().filter(|g| **g != name).cloned().collect();
        let scope = Scope::Definition {
            name: &name,
            later: &all_definitions,
        };
        resolve_expr(&body, &visible, &mut Vec::new(), &scope)?;
        definitions.push(Definition {
            name,
            description: desc,
            body,
            loc,
        });
    }

    let mut properties = Vec::new();
    let mut property_names = HashSet::new();
    for (annots, name, pred, loc) in raw.properties {
        if globals.contains(&name) || !property_names.insert(name.clone()) {
            return Err(ModelError::Duplicate { name, loc });
        }
        let desc = annots.desc.ok_or_else(|| ModelError::MissingAnnotation {
            what: "property",
            name: name.clone(),
            annotation: "@desc",
            loc,
        })?;
        let req = annots.req.ok_or_else(|| ModelError::MissingAnnotation {
            what: "property",
            name: name.clone(),
            annotation: "@req",
            loc,
        })?;
        if req.trim().is_empty() {
            return Err(ModelError::EmptyRequirement { name, loc });
        }
        resolve_pred(&pred, &globals, &mut Vec::new(), &Scope::Property)?;
        properties.push(Property {
            name,
            requirement: req,
            description: desc,
            pred,
            loc,
        });
    }

    Ok(SpecModel {
        sets: raw.sets,
        constants,
        constraints,
        definitions,
        properties,
    })
}

enum Scope<'a> {
    Constants,
    Definition { name: &'a str, later: &'a HashSet<String> },
    Property,
}

fn check_ident(name: &str, loc: Loc, globals: &HashSet<String>, locals: &[String], scope: &Scope) -> Result<(), ModelError> {
    if locals.iter().any(|l| l == name) || globals.contains(name) {
        return Ok(());
    }
    if let Scope::Definition { name: def, later } = scope {
        if later.contains(name) {
            return Err(ModelError::DefinitionCycle {
                definition: def.to_string(),
                name: name.to_string(),
                loc,
            });
        }
    }
    Err(ModelError::Undeclared {
        name: name.to_string(),
        loc,
    })
}

fn bind(vars: &[String], loc: Loc, globals: &HashSet<String>, locals: &mut Vec<String>) -> Result<usize, ModelError> {
    let mut seen = HashSet::new();
    for v in vars {
        if globals.contains(v) || locals.contains(v) || !seen.insert(v) {
            return Err(ModelError::Shadowing { name: v.clone(), loc });
        }
    }
    locals.extend(vars.iter().cloned());
    Ok(vars.len())
}

fn resolve_expr(e: &Expr, globals: &HashSet<String>, locals: &mut Vec<String>, scope: &Scope) -> Result<(), ModelError> {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Builtin(_) => Ok(()),
        ExprKind::Ident(n) => check_ident(n, e.loc, globals, locals, scope),
        ExprKind::Pair(a, b)
        | ExprKind::Interval(a, b)
        | ExprKind::Binary(_, a, b)
        | ExprKind::Iterate(a, b)
        | ExprKind::Image(a, b)
        | ExprKind::Apply(a, b) => {
            resolve_expr(a, globals, locals, scope)?;
            resolve_expr(b, globals, locals, scope)
        }
        ExprKind::SetExt(items) => items.iter().try_for_each(|i| resolve_expr(i, globals, locals, scope)),
        ExprKind::Unary(_, a) => resolve_expr(a, globals, locals, scope),
        ExprKind::BoolOf(p) => resolve_pred(p, globals, locals, scope),
        ExprKind::Lambda {
            params,
            constraint,
            body,
        } => {
            let n = bind(params, e.loc, globals, locals)?;
            let r = resolve_pred(constraint, globals, locals, scope).and_then(|_| resolve_expr(body, globals, locals, scope));
            locals.truncate(locals.len() - n);
            r
        }
        ExprKind::Comprehension {
            vars,
            constraint,
            output,
        } => {
            let n = bind(vars, e.loc, globals, locals)?;
            let mut r = resolve_pred(constraint, globals, locals, scope);
            if let (Ok(()), Some(o)) = (&r, output) {
                r = resolve_expr(o, globals, locals, scope);
            }
            locals.truncate(locals.len() - n);
            r
        }
    }
}

fn resolve_pred(p: &Pred, globals: &HashSet<String>, locals: &mut Vec<String>, scope: &Scope) -> Result<(), ModelError> {
    match &p.kind {
        PredKind::Cmp(_, a, b) => {
            resolve_expr(a, globals, locals, scope)?;
            resolve_expr(b, globals, locals, scope)
        }
        PredKind::And(a, b) | PredKind::Or(a, b) | PredKind::Implies(a, b) | PredKind::Equiv(a, b) => {
            resolve_pred(a, globals, locals, scope)?;
            resolve_pred(b, globals, locals, scope)
        }
        PredKind::Not(a) => resolve_pred(a, globals, locals, scope),
        PredKind::ForAll(vars, body) | PredKind::Exists(vars, body) => {
            let n = bind(vars, p.loc, globals, locals)?;
            let r = resolve_pred(body, globals, locals, scope);
            locals.truncate(locals.len() - n);
            r
        }
    }
}

/// Identifiers occurring free in an expression.
pub fn free_identifiers(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    free_in_expr(e, &mut Vec::new(), &mut out);
    out
}

/// Identifiers occurring free in a predicate.
pub fn free_identifiers_pred(p: &Pred) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    free_in_pred(p, &mut Vec::new(), &mut out);
    out
}

fn free_in_expr(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Builtin(_) => {}
        ExprKind::Ident(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        ExprKind::Pair(a, b)
        | ExprKind::Interval(a, b)
        | ExprKind::Binary(_, a, b)
        | ExprKind::Iterate(a, b)
        | ExprKind::Image(a, b)
        | ExprKind::Apply(a, b) => {
            free_in_expr(a, bound, out);
            free_in_expr(b, bound, out);
        }
        ExprKind::SetExt(items) => items.iter().for_each(|i| free_in_expr(i, bound, out)),
        ExprKind::Unary(_, a) => free_in_expr(a, bound, out),
        ExprKind::BoolOf(p) => free_in_pred(p, bound, out),
        ExprKind::Lambda {
            params,
            constraint,
            body,
        } => {
            let n = bound.len();
            bound.extend(params.iter().cloned());
            free_in_pred(constraint, bound, out);
            free_in_expr(body, bound, out);
            bound.truncate(n);
        }
        ExprKind::Comprehension {
            vars,
            constraint,
            output,
        } => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            free_in_pred(constraint, bound, out);
            if let Some(o) = output {
                free_in_expr(o, bound, out);
            }
            bound.truncate(n);
        }
    }
}

fn free_in_pred(p: &Pred, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match &p.kind {
        PredKind::Cmp(_, a, b) => {
            free_in_expr(a, bound, out);
            free_in_expr(b, bound, out);
        }
        PredKind::And(a, b) | PredKind::Or(a, b) | PredKind::Implies(a, b) | PredKind::Equiv(a, b) => {
            free_in_pred(a, bound, out);
            free_in_pred(b, bound, out);
        }
        PredKind::Not(a) => free_in_pred(a, bound, out),
        PredKind::ForAll(vars, body) | PredKind::Exists(vars, body) => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            free_in_pred(body, bound, out);
            bound.truncate(n);
        }
    }
}

/// Definitions referenced (directly) by a set of free identifiers.
pub fn referenced_definitions(model: &SpecModel, names: &BTreeSet<String>) -> Vec<String> {
    let index: HashMap<&str, usize> = model
        .definitions
        .iter()
        .enumerate()
        .map(|(i, d)| (d.name.as_str(), i))
        .collect();
    let mut found: Vec<(usize, String)> = names
        .iter()
        .filter_map(|n| index.get(n.as_str()).map(|i| (*i, n.clone())))
        .collect();
    found.sort();
    found.into_iter().map(|(_, n)| n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
SETS t_block; t_block_frontier; t_dir = {c_upward, c_downward}
CONSTANTS
  f_block_orig : t_block --> t_block_frontier &
  k_eps : INTEGER &
  k_eps >= 0
DEFINITIONS
  @desc "successor"
  r_a == f_block_orig ; f_block_orig~
  @desc "closure"
  r_b == closure1(r_a)
PROPERTIES
  @req REQ_1 @desc "eps non-negative"
  p_eps == k_eps >= 0
"#;

    #[test]
    fn parses_sets_clause() {
        let m = parse_model("SETS t_block; t_block_frontier").unwrap();
        let names: Vec<_> = m.sets.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["t_block", "t_block_frontier"]);
        assert!(m.sets.iter().all(|s| s.elements.is_none()));
    }

    #[test]
    fn empty_properties_clause_is_valid() {
        let m = parse_model("SETS s\nPROPERTIES\n").unwrap();
        assert!(m.properties.is_empty());
    }

    #[test]
    fn splits_typing_from_constraints() {
        let m = parse_model(SMALL).unwrap();
        assert_eq!(m.constants.len(), 2);
        assert_eq!(m.constraints.len(), 1);
        assert_eq!(m.definitions.len(), 2);
        assert_eq!(m.properties[0].requirement, "REQ_1");
    }

    #[test]
    fn forward_definition_reference_is_rejected() {
        let src = "SETS s\nDEFINITIONS\n@desc \"a\" a == b\n@desc \"b\" b == s";
        match parse_model(src) {
            Err(ModelError::DefinitionCycle { definition, name, .. }) => {
                assert_eq!((definition.as_str(), name.as_str()), ("a", "b"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let self_ref = "SETS s\nDEFINITIONS\n@desc \"a\" a == a \\/ s";
        assert!(matches!(parse_model(self_ref), Err(ModelError::DefinitionCycle { .. })));
    }

    #[test]
    fn name_errors() {
        assert!(matches!(parse_model("SETS s; s"), Err(ModelError::Duplicate { .. })));
        assert!(matches!(
            parse_model("SETS s\nCONSTANTS c : t"),
            Err(ModelError::Undeclared { .. })
        ));
        assert!(matches!(
            parse_model("SETS s\nCONSTANTS c <: s\nDEFINITIONS @desc \"x\" d == %c.(c : s | c)"),
            Err(ModelError::Shadowing { .. })
        ));
        assert!(matches!(
            parse_model("SETS s\nPROPERTIES @desc \"x\" p == 1 = 1"),
            Err(ModelError::MissingAnnotation { annotation: "@req", .. })
        ));
        assert!(matches!(
            parse_model("SETS s\nDEFINITIONS d == s"),
            Err(ModelError::MissingAnnotation { annotation: "@desc", .. })
        ));
        let err = parse_model("SETS s\nCONSTANTS c : s &").unwrap_err();
        assert!(matches!(err, ModelError::Syntax(_)), "{err}");
    }

    #[test]
    fn syntax_error_carries_location() {
        let err = parse_pred("x : {1, 2").unwrap_err();
        assert_eq!(err.loc, Loc { line: 1, col: 10 });
        assert!(err.expected.contains('}'));
    }

    #[test]
    fn maps_is_left_nested() {
        let e = parse_expr("a |-> b |-> c").unwrap();
        match e.kind {
            ExprKind::Pair(l, r) => {
                assert!(matches!(l.kind, ExprKind::Pair(..)));
                assert_eq!(r.as_ident(), Some("c"));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn free_identifiers_examples() {
        let e = parse_expr("%x.(x : s | x |-> k)").unwrap();
        let names: Vec<_> = free_identifiers(&e).into_iter().collect();
        assert_eq!(names, ["k", "s"]);
        assert!(free_identifiers(&parse_expr("42").unwrap()).is_empty());
        let e = parse_expr("f_next_upward_left_block \\/ f_next_upward_right_block").unwrap();
        let names: Vec<_> = free_identifiers(&e).into_iter().collect();
        assert_eq!(names, ["f_next_upward_left_block", "f_next_upward_right_block"]);
    }

    #[test]
    fn parenthesized_predicates_and_expressions() {
        let p = parse_pred("((a |-> b) : S & (x + 1) = 2) or not(y < 3)").unwrap();
        assert!(matches!(p.kind, PredKind::Or(..)));
        let p = parse_pred("!(x, y).(x |-> y : r => (x = y or x < y))").unwrap();
        assert!(matches!(p.kind, PredKind::ForAll(ref v, _) if v.len() == 2));
        assert!(parse_pred("!x.(x : s & x = 1)").is_err());
    }

    #[test]
    fn comprehension_forms() {
        let e = parse_expr("{x, y | x : s & y = x + 1}").unwrap();
        assert!(matches!(e.kind, ExprKind::Comprehension { output: None, .. }));
        let e = parse_expr("{x . x : s | x * 2}").unwrap();
        assert!(matches!(e.kind, ExprKind::Comprehension { output: Some(_), .. }));
        let e = parse_expr("{x, y}").unwrap();
        assert!(matches!(e.kind, ExprKind::SetExt(ref v) if v.len() == 2));
    }

    #[test]
    fn pretty_print_round_trips_small_model_bodies() {
        let m = parse_model(SMALL).unwrap();
        for d in &m.definitions {
            let text = expr_to_string(&d.body);
            assert_eq!(parse_expr(&text).unwrap(), d.body, "{text}");
        }
        let p = &m.properties[0].pred;
        assert_eq!(&parse_pred(&pred_to_string(p)).unwrap(), p);
    }
}
