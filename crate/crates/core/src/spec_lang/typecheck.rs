//! Type inference for models.
//!
//! Types are inferred bottom-up with unification; the only source of
//! polymorphism is the empty set extension `{}`. Every expression node of
//! the returned model carries its resolved type.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::ast::*;
use super::{free_identifiers, free_identifiers_pred};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub loc: Loc,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type error at {}: {}", self.loc, self.message)
    }
}

impl std::error::Error for TypeError {}

/// All type errors found in a model, one per failing item at most.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeErrors(pub Vec<TypeError>);

impl fmt::Display for TypeErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeErrors {}

type TResult<T> = Result<T, TypeError>;

fn err<T>(loc: Loc, message: impl Into<String>) -> TResult<T> {
    Err(TypeError {
        loc,
        message: message.into(),
    })
}

struct Checker {
    subst: Vec<Option<Type>>,
    globals: HashMap<String, Type>,
    locals: Vec<(String, Type)>,
}

impl Checker {
    fn fresh(&mut self) -> Type {
        self.subst.push(None);
        Type::Var(self.subst.len() as u32 - 1)
    }

    fn resolve(&self, t: &Type) -> Type {
        match t {
            Type::Var(v) => match &self.subst[*v as usize] {
                Some(inner) => self.resolve(inner),
                None => t.clone(),
            },
            Type::Pair(l, r) => Type::pair(self.resolve(l), self.resolve(r)),
            Type::Set(e) => Type::set(self.resolve(e)),
            _ => t.clone(),
        }
    }

    fn occurs(&self, v: u32, t: &Type) -> bool {
        match self.resolve(t) {
            Type::Var(w) => v == w,
            Type::Pair(l, r) => self.occurs(v, &l) || self.occurs(v, &r),
            Type::Set(e) => self.occurs(v, &e),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Type, b: &Type, loc: Loc, what: &str) -> TResult<()> {
        let (ra, rb) = (self.resolve(a), self.resolve(b));
        match (&ra, &rb) {
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Var(x), other) | (other, Type::Var(x)) => {
                if self.occurs(*x, other) {
                    return err(loc, format!("{what}: infinite type"));
                }
                self.subst[*x as usize] = Some(other.clone());
                Ok(())
            }
            (Type::Pair(a1, a2), Type::Pair(b1, b2)) => {
                self.unify(a1, b1, loc, what)?;
                self.unify(a2, b2, loc, what)
            }
            (Type::Set(x), Type::Set(y)) => self.unify(x, y, loc, what),
            _ if ra == rb => Ok(()),
            _ => err(loc, format!("{what}: expected {ra}, found {rb}")),
        }
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
            .or_else(|| self.globals.get(name).cloned())
    }

    fn relation(&mut self) -> (Type, Type, Type) {
        let (a, b) = (self.fresh(), self.fresh());
        let r = Type::relation(a.clone(), b.clone());
        (r, a, b)
    }

    fn expect_relation(&mut self, e: &mut Expr, what: &str) -> TResult<(Type, Type)> {
        let t = self.infer(e)?;
        let (r, a, b) = self.relation();
        self.unify(&r, &t, e.loc, what)?;
        Ok((a, b))
    }

    fn expect(&mut self, e: &mut Expr, want: &Type, what: &str) -> TResult<()> {
        let t = self.infer(e)?;
        self.unify(want, &t, e.loc, what)
    }

    fn infer(&mut self, e: &mut Expr) -> TResult<Type> {
        let loc = e.loc;
        let t = match &mut e.kind {
            ExprKind::Int(_) => Type::Int,
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Builtin(BuiltinSet::Bool) => Type::set(Type::Bool),
            ExprKind::Builtin(_) => Type::set(Type::Int),
            ExprKind::Ident(n) => match self.lookup(n) {
                Some(t) => t,
                None => return err(loc, format!("`{n}` has no type at this point")),
            },
            ExprKind::Pair(l, r) => {
                let tl = self.infer(l)?;
                let tr = self.infer(r)?;
                Type::pair(tl, tr)
            }
            ExprKind::SetExt(items) => {
                let elem = self.fresh();
                for item in items.iter_mut() {
                    self.expect(item, &elem, "set extension element")?;
                }
                Type::set(elem)
            }
            ExprKind::Interval(l, r) => {
                self.expect(l, &Type::Int, "interval bound")?;
                self.expect(r, &Type::Int, "interval bound")?;
                Type::set(Type::Int)
            }
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, loc)?,
            ExprKind::Unary(op, inner) => match op {
                UnOp::Neg => {
                    self.expect(inner, &Type::Int, "negation")?;
                    Type::Int
                }
                UnOp::Inverse => {
                    let (a, b) = self.expect_relation(inner, "inverse")?;
                    Type::relation(b, a)
                }
                UnOp::Dom => Type::set(self.expect_relation(inner, "dom")?.0),
                UnOp::Ran => Type::set(self.expect_relation(inner, "ran")?.1),
                UnOp::Closure1 => {
                    let (a, b) = self.expect_relation(inner, "closure1")?;
                    self.unify(&a, &b, loc, "closure1 requires a homogeneous relation")?;
                    Type::relation(a.clone(), a)
                }
                UnOp::Card => {
                    let elem = self.fresh();
                    self.expect(inner, &Type::set(elem), "card")?;
                    Type::Int
                }
                UnOp::Min | UnOp::Max => {
                    self.expect(inner, &Type::set(Type::Int), "min/max")?;
                    Type::Int
                }
            },
            ExprKind::Iterate(r, n) => {
                let (a, b) = self.expect_relation(r, "iterate")?;
                self.unify(&a, &b, loc, "iterate requires a homogeneous relation")?;
                self.expect(n, &Type::Int, "iterate count")?;
                Type::relation(a.clone(), a)
            }
            ExprKind::Image(r, s) => {
                let (a, b) = self.expect_relation(r, "relational image")?;
                self.expect(s, &Type::set(a), "relational image argument")?;
                Type::set(b)
            }
            ExprKind::Apply(f, x) => {
                let tf = self.infer(f)?;
                let resolved = self.resolve(&tf);
                let is_relation = match &resolved {
                    Type::Var(_) => true,
                    Type::Set(inner) => matches!(**inner, Type::Pair(..) | Type::Var(_)),
                    _ => false,
                };
                if !is_relation {
                    return err(loc, format!("application of a non-relation of type {resolved}"));
                }
                let (r, a, b) = self.relation();
                self.unify(&r, &tf, loc, "function application")?;
                self.expect(x, &a, "function argument")?;
                b
            }
            ExprKind::Lambda {
                params,
                constraint,
                body,
            } => {
                let mark = self.locals.len();
                let mut arg: Option<Type> = None;
                for p in params.iter() {
                    let t = self.fresh();
                    self.locals.push((p.clone(), t.clone()));
                    arg = Some(match arg {
                        None => t,
                        Some(prev) => Type::pair(prev, t),
                    });
                }
                let res = (|| {
                    self.binders(params, constraint, false)?;
                    for (p, t) in &self.locals[mark..] {
                        if matches!(self.resolve(t), Type::Var(_)) {
                            return err(loc, format!("lambda parameter `{p}` is not typed by the constraint"));
                        }
                    }
                    self.infer(body)
                })();
                self.locals.truncate(mark);
                Type::relation(arg.expect("at least one parameter"), res?)
            }
            ExprKind::Comprehension {
                vars,
                constraint,
                output,
            } => {
                let mark = self.locals.len();
                let mut tuple: Option<Type> = None;
                for v in vars.iter() {
                    let t = self.fresh();
                    self.locals.push((v.clone(), t.clone()));
                    tuple = Some(match tuple {
                        None => t,
                        Some(prev) => Type::pair(prev, t),
                    });
                }
                let res = (|| {
                    self.binders(vars, constraint, true)?;
                    match output {
                        Some(o) => self.infer(o),
                        None => Ok(tuple.expect("at least one variable")),
                    }
                })();
                self.locals.truncate(mark);
                Type::set(res?)
            }
            ExprKind::BoolOf(p) => {
                self.check_pred(p)?;
                Type::Bool
            }
        };
        e.ty = Some(t.clone());
        Ok(t)
    }

    fn binary(&mut self, op: BinOp, l: &mut Expr, r: &mut Expr, loc: Loc) -> TResult<Type> {
        Ok(match op {
            BinOp::Union | BinOp::Inter => {
                let s = Type::set(self.fresh());
                self.expect(l, &s, op.symbol())?;
                self.expect(r, &s, op.symbol())?;
                s
            }
            BinOp::Minus => {
                let tl = self.infer(l)?;
                let tr = self.infer(r)?;
                self.unify(&tl, &tr, loc, "operands of `-`")?;
                match self.resolve(&tl) {
                    Type::Int => Type::Int,
                    t @ Type::Set(_) => t,
                    Type::Var(_) => return err(loc, "cannot tell whether `-` is subtraction or set difference"),
                    other => return err(loc, format!("`-` applied to {other}")),
                }
            }
            BinOp::Times => {
                let tl = self.infer(l)?;
                let tr = self.infer(r)?;
                let (rl, rr) = (self.resolve(&tl), self.resolve(&tr));
                let int_like = |t: &Type| matches!(t, Type::Int);
                let set_like = |t: &Type| matches!(t, Type::Set(_));
                if int_like(&rl) || int_like(&rr) {
                    self.unify(&Type::Int, &tl, l.loc, "multiplication")?;
                    self.unify(&Type::Int, &tr, r.loc, "multiplication")?;
                    Type::Int
                } else if set_like(&rl) || set_like(&rr) {
                    let (a, b) = (self.fresh(), self.fresh());
                    self.unify(&Type::set(a.clone()), &tl, l.loc, "cartesian product")?;
                    self.unify(&Type::set(b.clone()), &tr, r.loc, "cartesian product")?;
                    Type::relation(a, b)
                } else {
                    return err(loc, format!("`*` applied to {rl} and {rr}"));
                }
            }
            BinOp::Plus | BinOp::Div | BinOp::Mod => {
                self.expect(l, &Type::Int, op.symbol())?;
                self.expect(r, &Type::Int, op.symbol())?;
                Type::Int
            }
            BinOp::FComp => {
                let (a, b) = self.expect_relation(l, "composition")?;
                let (b2, c) = self.expect_relation(r, "composition")?;
                self.unify(&b, &b2, loc, "composition middle type")?;
                Type::relation(a, c)
            }
            BinOp::PProd => {
                let (a, b) = self.expect_relation(l, "parallel product")?;
                let (c, d) = self.expect_relation(r, "parallel product")?;
                Type::relation(Type::pair(a, c), Type::pair(b, d))
            }
            BinOp::DomRes => {
                let (a, b) = self.expect_relation(r, "domain restriction")?;
                self.expect(l, &Type::set(a.clone()), "domain restriction")?;
                Type::relation(a, b)
            }
            BinOp::RanRes => {
                let (a, b) = self.expect_relation(l, "range restriction")?;
                self.expect(r, &Type::set(b.clone()), "range restriction")?;
                Type::relation(a, b)
            }
            BinOp::Rel | BinOp::PFun | BinOp::TFun => {
                let (a, b) = (self.fresh(), self.fresh());
                self.expect(l, &Type::set(a.clone()), "relation domain")?;
                self.expect(r, &Type::set(b.clone()), "relation range")?;
                Type::set(Type::relation(a, b))
            }
        })
    }

    /// Types the conjuncts of a binder body. With `enumerable`, each variable
    /// must be constrained to a finite domain before any other use.
    fn binders(&mut self, vars: &[String], body: &mut Pred, enumerable: bool) -> TResult<()> {
        let mut unbound: BTreeSet<&str> = vars.iter().map(String::as_str).collect();
        let conjuncts = conjuncts_mut(body);
        for c in conjuncts {
            self.check_pred(c)?;
            if !enumerable {
                continue;
            }
            let loc = c.loc;
            let free = free_identifiers_pred(c);
            let binder = match &c.kind {
                PredKind::Cmp(CmpOp::Member, lhs, rhs) => pattern_vars(lhs).and_then(|pv| {
                    let fresh: Vec<&str> = pv.iter().copied().filter(|v| unbound.contains(v)).collect();
                    let rhs_free = free_identifiers(rhs);
                    let rhs_closed = !rhs_free.iter().any(|n| unbound.contains(n.as_str()));
                    (!fresh.is_empty() && rhs_closed).then(|| {
                        let infinite = matches!(rhs.kind, ExprKind::Builtin(b) if b.is_infinite());
                        (fresh.into_iter().map(str::to_string).collect::<Vec<_>>(), infinite)
                    })
                }),
                PredKind::Cmp(CmpOp::Eq, lhs, rhs) => lhs.as_ident().filter(|n| unbound.contains(n)).and_then(|n| {
                    let rhs_free = free_identifiers(rhs);
                    (!rhs_free.iter().any(|m| unbound.contains(m.as_str()))).then(|| (vec![n.to_string()], false))
                }),
                _ => None,
            };
            match binder {
                Some((_, true)) => return err(loc, "quantifier domain is not enumerable"),
                Some((bound, false)) => {
                    for b in bound {
                        unbound.remove(b.as_str());
                    }
                }
                None => {
                    if let Some(v) = free.iter().find(|n| unbound.contains(n.as_str())) {
                        return err(loc, format!("`{v}` is used before being constrained to a finite domain"));
                    }
                }
            }
        }
        if enumerable {
            if let Some(v) = unbound.iter().next() {
                return err(body.loc, format!("`{v}` is not constrained to a finite domain"));
            }
        }
        Ok(())
    }

    fn check_pred(&mut self, p: &mut Pred) -> TResult<()> {
        let loc = p.loc;
        match &mut p.kind {
            PredKind::Cmp(op, l, r) => match op {
                CmpOp::Member | CmpOp::NotMember => {
                    let tl = self.infer(l)?;
                    self.expect(r, &Type::set(tl), "membership")
                }
                CmpOp::Subset | CmpOp::NotSubset => {
                    let s = Type::set(self.fresh());
                    self.expect(l, &s, "inclusion")?;
                    self.expect(r, &s, "inclusion")
                }
                CmpOp::Eq | CmpOp::Neq => {
                    let tl = self.infer(l)?;
                    let tr = self.infer(r)?;
                    self.unify(&tl, &tr, loc, "equality operands")
                }
                _ => {
                    self.expect(l, &Type::Int, "integer comparison")?;
                    self.expect(r, &Type::Int, "integer comparison")
                }
            },
            PredKind::And(a, b) | PredKind::Or(a, b) | PredKind::Implies(a, b) | PredKind::Equiv(a, b) => {
                self.check_pred(a)?;
                self.check_pred(b)
            }
            PredKind::Not(a) => self.check_pred(a),
            PredKind::ForAll(..) | PredKind::Exists(..) => {
                let universal = matches!(p.kind, PredKind::ForAll(..));
                let (vars, body) = match &mut p.kind {
                    PredKind::ForAll(v, b) | PredKind::Exists(v, b) => (v.clone(), b),
                    _ => unreachable!(),
                };
                let mark = self.locals.len();
                for v in &vars {
                    let t = self.fresh();
                    self.locals.push((v.clone(), t));
                }
                let res = (|| {
                    if universal {
                        match &mut body.kind {
                            PredKind::Implies(dom, rest) => {
                                self.binders(&vars, dom, true)?;
                                self.check_pred(rest)
                            }
                            _ => err(body.loc, "universal quantifier body must be an implication"),
                        }
                    } else {
                        self.binders(&vars, body, true)
                    }
                })();
                self.locals.truncate(mark);
                res
            }
        }
    }

    fn finalize_expr(&self, e: &mut Expr) {
        if let Some(t) = &e.ty {
            e.ty = Some(self.resolve(t));
        }
        match &mut e.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Builtin(_) | ExprKind::Ident(_) => {}
            ExprKind::Pair(a, b)
            | ExprKind::Interval(a, b)
            | ExprKind::Binary(_, a, b)
            | ExprKind::Iterate(a, b)
            | ExprKind::Image(a, b)
            | ExprKind::Apply(a, b) => {
                self.finalize_expr(a);
                self.finalize_expr(b);
            }
            ExprKind::SetExt(items) => items.iter_mut().for_each(|i| self.finalize_expr(i)),
            ExprKind::Unary(_, a) => self.finalize_expr(a),
            ExprKind::BoolOf(p) => self.finalize_pred(p),
            ExprKind::Lambda { constraint, body, .. } => {
                self.finalize_pred(constraint);
                self.finalize_expr(body);
            }
            ExprKind::Comprehension { constraint, output, .. } => {
                self.finalize_pred(constraint);
                if let Some(o) = output {
                    self.finalize_expr(o);
                }
            }
        }
    }

    fn finalize_pred(&self, p: &mut Pred) {
        match &mut p.kind {
            PredKind::Cmp(_, a, b) => {
                self.finalize_expr(a);
                self.finalize_expr(b);
            }
            PredKind::And(a, b) | PredKind::Or(a, b) | PredKind::Implies(a, b) | PredKind::Equiv(a, b) => {
                self.finalize_pred(a);
                self.finalize_pred(b);
            }
            PredKind::Not(a) => self.finalize_pred(a),
            PredKind::ForAll(_, b) | PredKind::Exists(_, b) => self.finalize_pred(b),
        }
    }
}

fn conjuncts_mut(p: &mut Pred) -> Vec<&mut Pred> {
    let mut out = Vec::new();
    fn walk<'a>(p: &'a mut Pred, out: &mut Vec<&'a mut Pred>) {
        if matches!(p.kind, PredKind::And(..)) {
            if let PredKind::And(l, r) = &mut p.kind {
                walk(l, out);
                walk(r, out);
            }
        } else {
            out.push(p);
        }
    }
    walk(p, &mut out);
    out
}

/// Type-checks a parsed model, returning a copy whose expression nodes and
/// constants carry their types.
pub fn typecheck(model: &SpecModel) -> Result<SpecModel, TypeErrors> {
    let mut out = model.clone();
    let mut ck = Checker {
        subst: Vec::new(),
        globals: HashMap::new(),
        locals: Vec::new(),
    };
    let mut errors = Vec::new();

    for set in &model.sets {
        ck.globals.insert(set.name.clone(), Type::set(Type::given(&set.name)));
        for el in set.elements.iter().flatten() {
            ck.globals.insert(el.clone(), Type::given(&set.name));
        }
    }

    for c in out.constants.iter_mut() {
        let subset = c.is_subset_typing();
        let loc = c.typing.loc;
        let res = match &mut c.typing.kind {
            PredKind::Cmp(_, lhs, set) => ck.infer(set).and_then(|ts| {
                let elem = ck.fresh();
                ck.unify(&Type::set(elem.clone()), &ts, loc, "typing predicate")?;
                let t = if subset { ts } else { elem };
                let t = ck.resolve(&t);
                lhs.ty = Some(t.clone());
                Ok(t)
            }),
            _ => unreachable!(),
        };
        match res {
            Ok(t) => {
                ck.finalize_pred(&mut c.typing);
                ck.globals.insert(c.name.clone(), t.clone());
                c.ty = Some(t);
            }
            Err(e) => errors.push(e),
        }
    }

    for p in out.constraints.iter_mut() {
        match ck.check_pred(p) {
            Ok(()) => ck.finalize_pred(p),
            Err(e) => errors.push(e),
        }
    }

    for d in out.definitions.iter_mut() {
        match ck.infer(&mut d.body) {
            Ok(t) => {
                ck.finalize_expr(&mut d.body);
                ck.globals.insert(d.name.clone(), ck.resolve(&t));
            }
            Err(e) => {
                errors.push(e);
                let t = ck.fresh();
                ck.globals.insert(d.name.clone(), t);
            }
        }
    }

    for p in out.properties.iter_mut() {
        match ck.check_pred(&mut p.pred) {
            Ok(()) => ck.finalize_pred(&mut p.pred),
            Err(e) => errors.push(e),
        }
    }

    if errors.is_empty() {
        Ok(out)
    } else {
        Err(TypeErrors(errors))
    }
}

/// Type of a closed expression in the context of a checked model, with
/// optional extra local variables.
pub fn type_of_expr(model: &SpecModel, e: &mut Expr, locals: &[(String, Type)]) -> Result<Type, TypeError> {
    let mut ck = Checker {
        subst: Vec::new(),
        globals: HashMap::new(),
        locals: locals.to_vec(),
    };
    for set in &model.sets {
        ck.globals.insert(set.name.clone(), Type::set(Type::given(&set.name)));
        for el in set.elements.iter().flatten() {
            ck.globals.insert(el.clone(), Type::given(&set.name));
        }
    }
    for c in &model.constants {
        if let Some(t) = &c.ty {
            ck.globals.insert(c.name.clone(), t.clone());
        }
    }
    for d in &model.definitions {
        if let Some(t) = &d.body.ty {
            ck.globals.insert(d.name.clone(), t.clone());
        }
    }
    let t = ck.infer(e)?;
    ck.finalize_expr(e);
    Ok(ck.resolve(&t))
}

/// Checks a predicate in the context of a checked model.
pub fn check_pred_in(model: &SpecModel, p: &mut Pred) -> Result<(), TypeError> {
    let mut dummy = Expr::new(ExprKind::BoolOf(Box::new(p.clone())), p.loc);
    type_of_expr(model, &mut dummy, &[])?;
    if let ExprKind::BoolOf(checked) = dummy.kind {
        *p = *checked;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::{parse_expr, parse_model, parse_pred};

    fn model(src: &str) -> SpecModel {
        typecheck(&parse_model(src).unwrap()).unwrap()
    }

    const BASE: &str = "SETS t_block; t_block_frontier; t_dir = {c_upward, c_downward}\nCONSTANTS\n  f_block_orig : t_block --> t_block_frontier &\n  r_next : t_block <-> t_block & s_sub <: t_block & k : 0..10\n";

    #[test]
    fn typing_predicates_declare_types() {
        let m = model(BASE);
        assert_eq!(
            m.constant("f_block_orig").unwrap().ty,
            Some(Type::relation(Type::given("t_block"), Type::given("t_block_frontier")))
        );
        assert_eq!(m.constant("s_sub").unwrap().ty, Some(Type::set(Type::given("t_block"))));
        assert_eq!(m.constant("k").unwrap().ty, Some(Type::Int));
    }

    fn expr_type(m: &SpecModel, src: &str) -> Result<Type, TypeError> {
        let mut e = parse_expr(src).unwrap();
        type_of_expr(m, &mut e, &[])
    }

    #[test]
    fn closure_requires_homogeneous_relation() {
        let m = model(BASE);
        let e = expr_type(&m, "closure1(f_block_orig)").unwrap_err();
        assert!(e.message.contains("homogeneous"), "{e}");
        assert_eq!(
            expr_type(&m, "closure1(r_next)").unwrap(),
            Type::relation(Type::given("t_block"), Type::given("t_block"))
        );
        assert!(matches!(expr_type(&m, "closure1({})").unwrap(), Type::Set(_)));
    }

    #[test]
    fn pair_membership_in_product_is_well_typed() {
        let m = model(BASE);
        let mut p = parse_pred("1 |-> 2 : (1..3) * (1..3)").unwrap();
        check_pred_in(&m, &mut p).unwrap();
    }

    #[test]
    fn operator_rules() {
        let m = model(BASE);
        let blk = Type::given("t_block");
        assert_eq!(expr_type(&m, "k - 1").unwrap(), Type::Int);
        assert_eq!(expr_type(&m, "t_block - s_sub").unwrap(), Type::set(blk.clone()));
        assert_eq!(
            expr_type(&m, "r_next || {c_upward |-> c_downward}").unwrap(),
            Type::relation(
                Type::pair(blk.clone(), Type::given("t_dir")),
                Type::pair(blk.clone(), Type::given("t_dir"))
            )
        );
        assert_eq!(
            expr_type(&m, "f_block_orig ; f_block_orig~").unwrap(),
            Type::relation(blk.clone(), blk.clone())
        );
        assert!(expr_type(&m, "t_block \\/ t_dir").is_err());
        let e = expr_type(&m, "k(1)").unwrap_err();
        assert!(e.message.contains("non-relation"), "{e}");
        assert!(expr_type(&m, "f_block_orig(c_upward)").is_err());
        assert_eq!(
            expr_type(&m, "%(x, y).(x : INTEGER & y : t_block | bool(x < 3))").unwrap(),
            Type::relation(Type::pair(Type::Int, blk.clone()), Type::Bool)
        );
    }

    #[test]
    fn quantifier_domains_must_be_enumerable() {
        let m = model(BASE);
        let mut p = parse_pred("!x.(x : INTEGER => x = x)").unwrap();
        let e = check_pred_in(&m, &mut p).unwrap_err();
        assert!(e.message.contains("not enumerable"), "{e}");
        let mut p = parse_pred("!x.(x > 1 & x : 0..3 => x = x)").unwrap();
        assert!(check_pred_in(&m, &mut p).unwrap_err().message.contains("before"));
        let mut p = parse_pred("#(x, y).(x |-> y : r_next & x /= y)").unwrap();
        check_pred_in(&m, &mut p).unwrap();
        let mut p = parse_pred("#(x, y).(x : 0..3 & y = x + 1 & y > 2)").unwrap();
        check_pred_in(&m, &mut p).unwrap();
    }

    #[test]
    fn deterministic_annotations() {
        let parsed = parse_model(&format!(
            "{BASE}DEFINITIONS @desc \"d\" d == %x.(x : t_block | r_next[{{x}}])\n"
        ))
        .unwrap();
        let a = typecheck(&parsed).unwrap();
        let b = typecheck(&parsed).unwrap();
        assert_eq!(a.definitions[0].body.ty, b.definitions[0].body.ty);
        assert_eq!(
            format!("{:?}", a.definitions[0].body),
            format!("{:?}", b.definitions[0].body)
        );
    }

    #[test]
    fn errors_are_collected_per_item() {
        let parsed = parse_model(&format!(
            "{BASE}DEFINITIONS @desc \"a\" a == k \\/ 1\n@desc \"b\" b == t_block * 2\nPROPERTIES @req R @desc \"p\" p == k = TRUE\n"
        ))
        .unwrap();
        let errs = typecheck(&parsed).unwrap_err();
        assert_eq!(errs.0.len(), 3, "{errs}");
    }
}
