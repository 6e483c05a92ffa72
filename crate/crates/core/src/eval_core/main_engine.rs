//! The main evaluator. Closures, products, intervals, lambdas and
//! comprehensions stay symbolic until an operation needs their extension.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::atomic::Ordering;
use std::sync::{Arc, OnceLock};

use crate::dataset_io::Dataset;
use crate::spec_lang::{
    expr_to_string, pattern_vars, pred_to_string, BinOp, BuiltinSet, CmpOp, Expr, ExprKind, Loc, Pred, PredKind,
    SpecModel, UnOp,
};
use crate::value::{Atom, Int, Value};

use super::closure::{closure1_dense, iterate_relation, successors, ReachIndex};
use super::lazy::{Binder, ClosureSet, Lazy, LazySet};
use super::trace::{PredTrace, Witness, WitnessKind};
use super::{Counters, EvalError, Truth};

type R<T> = Result<T, EvalError>;

const RENDER_MAX: usize = 160;
/// Closure membership queries answered by search before an index is built.
const INDEX_AFTER: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Cache definition values for the lifetime of the engine.
    pub memoize: bool,
    /// Largest set a lazy value may be expanded into.
    pub force_limit: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            memoize: true,
            force_limit: 10_000_000,
        }
    }
}

/// Result of the main engine: a canonical value or a symbolic set.
#[derive(Clone)]
pub enum Val<'a> {
    V(Value),
    L(Arc<LazySet<'a>>),
}

impl<'a> Val<'a> {
    fn lazy(kind: Lazy<'a>) -> Self {
        Val::L(LazySet::new(kind))
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Val::V(v) => Some(v),
            Val::L(_) => None,
        }
    }

    /// Name of the symbolic representation, if the value is one.
    pub fn lazy_kind(&self) -> Option<&'static str> {
        match self {
            Val::V(_) => None,
            Val::L(l) => Some(l.kind.describe()),
        }
    }
}

impl std::fmt::Debug for Val<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Val::V(v) => write!(f, "{v:?}"),
            Val::L(l) => write!(f, "<{}>", l.kind.describe()),
        }
    }
}

/// Local variable bindings, innermost last.
#[derive(Clone, Default)]
pub struct Env<'a> {
    vars: Vec<(&'a str, Val<'a>)>,
}

impl<'a> Env<'a> {
    fn get(&self, name: &str) -> Option<&Val<'a>> {
        self.vars.iter().rev().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    fn push(&mut self, name: &'a str, v: Val<'a>) {
        self.vars.push((name, v));
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    fn truncate(&mut self, n: usize) {
        self.vars.truncate(n);
    }

    fn bound_since(&self, mark: usize, name: &str) -> bool {
        self.vars[mark..].iter().any(|(n, _)| *n == name)
    }
}

enum Global {
    Value(Value),
    Def(usize),
}

pub struct Engine<'a> {
    model: &'a SpecModel,
    data: &'a Dataset,
    opts: EngineOptions,
    globals: HashMap<&'a str, Global>,
    defs: Vec<OnceLock<R<Val<'a>>>>,
    pub counters: Counters,
}

fn wd_type(loc: Loc, what: &str) -> EvalError {
    EvalError::wd(loc, format!("expected {what}"))
}

fn set_of(v: &Value, loc: Loc) -> R<&Arc<Vec<Value>>> {
    match v {
        Value::Set(s) => Ok(s),
        _ => Err(wd_type(loc, "a set")),
    }
}

fn int_of(v: &Value, loc: Loc) -> R<&Int> {
    v.as_int().ok_or_else(|| wd_type(loc, "an integer"))
}

/// Splits a left-nested tuple into `n` components.
fn destructure(n: usize, v: &Value) -> Option<Vec<Value>> {
    if n == 1 {
        return Some(vec![v.clone()]);
    }
    let (l, r) = v.as_pair()?;
    let mut out = destructure(n - 1, l)?;
    out.push(r.clone());
    Some(out)
}

fn tuple(vals: &[Value]) -> Value {
    let mut it = vals.iter();
    let first = it.next().expect("non-empty tuple").clone();
    it.fold(first, |acc, v| Value::pair(acc, v.clone()))
}

fn text_pred(p: &Pred) -> String {
    pred_to_string(p)
}

fn text_expr(e: &Expr) -> String {
    expr_to_string(e)
}

impl<'a> Engine<'a> {
    pub fn new(model: &'a SpecModel, data: &'a Dataset, opts: EngineOptions) -> Self {
        let mut globals = HashMap::new();
        for set in &model.sets {
            if let Some(id) = data.universes.id(&set.name) {
                globals.insert(set.name.as_str(), Global::Value(data.universes.set_value(id)));
                for el in set.elements.iter().flatten() {
                    if let Some(index) = data.universes.get(id).lookup(el) {
                        globals.insert(el.as_str(), Global::Value(Value::Atom(Atom { set: id, index })));
                    }
                }
            }
        }
        for c in &model.constants {
            if let Some(v) = data.value(&c.name) {
                globals.insert(c.name.as_str(), Global::Value(v.clone()));
            }
        }
        for (i, d) in model.definitions.iter().enumerate() {
            globals.insert(d.name.as_str(), Global::Def(i));
        }
        Engine {
            model,
            data,
            opts,
            globals,
            defs: model.definitions.iter().map(|_| OnceLock::new()).collect(),
            counters: Counters::default(),
        }
    }

    pub fn model(&self) -> &'a SpecModel {
        self.model
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    /// Evaluates every definition once, in order, filling the cache.
    pub fn warm_up(&self) {
        if self.opts.memoize {
            for i in 0..self.defs.len() {
                let _ = self.definition(i);
            }
        }
    }

    pub fn render(&self, v: &Value) -> String {
        v.render_bounded(&self.data.universes, RENDER_MAX)
    }

    fn render_val(&self, v: &Val<'a>) -> String {
        match v {
            Val::V(v) => self.render(v),
            Val::L(l) => match l.forced.get() {
                Some(Ok(v)) => self.render(v),
                _ => format!("<{}>", l.kind.describe()),
            },
        }
    }

    /// Value of a named definition.
    pub fn definition_value(&self, name: &str) -> Option<R<Val<'a>>> {
        let i = self.model.definitions.iter().position(|d| d.name == name)?;
        Some(self.definition(i))
    }

    fn definition(&self, i: usize) -> R<Val<'a>> {
        let compute = || {
            self.counters
                .definitions_evaluated
                .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            self.eval(&self.model.definitions[i].body, &mut Env::default())
        };
        if self.opts.memoize {
            self.defs[i].get_or_init(compute).clone()
        } else {
            compute()
        }
    }

    fn lookup(&self, name: &str, env: &Env<'a>, loc: Loc) -> R<Val<'a>> {
        if let Some(v) = env.get(name) {
            return Ok(v.clone());
        }
        match self.globals.get(name) {
            Some(Global::Value(v)) => Ok(Val::V(v.clone())),
            Some(Global::Def(i)) => self.definition(*i),
            None => Err(EvalError::capacity(loc, format!("`{name}` has no value here"))),
        }
    }

    /// Evaluates a closed expression.
    pub fn eval_expr(&self, e: &'a Expr) -> R<Val<'a>> {
        self.eval(e, &mut Env::default())
    }

    /// Evaluates a closed expression and expands it to a canonical value.
    pub fn eval_value(&self, e: &'a Expr) -> R<Value> {
        let v = self.eval_expr(e)?;
        self.force(&v, e.loc)
    }

    fn value(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Value> {
        let v = self.eval(e, env)?;
        self.force(&v, e.loc)
    }

    fn int(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Int> {
        let v = self.value(e, env)?;
        int_of(&v, e.loc).cloned()
    }

    fn eval(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Val<'a>> {
        let loc = e.loc;
        Ok(match &e.kind {
            ExprKind::Int(b) => Val::V(Value::Int(Int::from_big(b.clone()))),
            ExprKind::Bool(b) => Val::V(Value::Bool(*b)),
            ExprKind::Ident(n) => self.lookup(n, env, loc)?,
            ExprKind::Builtin(BuiltinSet::Bool) => {
                Val::V(Value::set_from_sorted(vec![Value::Bool(false), Value::Bool(true)]))
            }
            ExprKind::Builtin(b) => Val::lazy(Lazy::Builtin(*b)),
            ExprKind::Pair(l, r) => Val::V(Value::pair(self.value(l, env)?, self.value(r, env)?)),
            ExprKind::SetExt(items) => {
                let elems = items.iter().map(|i| self.value(i, env)).collect::<R<Vec<_>>>()?;
                Val::V(Value::set_from(elems))
            }
            ExprKind::Interval(lo, hi) => {
                let (lo, hi) = (self.int(lo, env)?, self.int(hi, env)?);
                if hi < lo {
                    Val::V(Value::empty_set())
                } else {
                    Val::lazy(Lazy::Interval(lo, hi))
                }
            }
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, env, loc)?,
            ExprKind::Unary(op, x) => self.unary(*op, x, env, loc)?,
            ExprKind::Iterate(r, n) => {
                let rel = self.eval(r, env)?;
                let n = self.int(n, env)?;
                if n.is_negative() {
                    return Err(EvalError::wd(loc, format!("iterate with negative count {n}")));
                }
                match n.to_i64() {
                    Some(0) => {
                        let elems = self.elems(&rel, loc)?;
                        let mut nodes = Vec::with_capacity(elems.len() * 2);
                        for p in elems.iter() {
                            let (a, b) = p.as_pair().ok_or_else(|| wd_type(loc, "a relation"))?;
                            nodes.push(a.clone());
                            nodes.push(b.clone());
                        }
                        nodes.sort_unstable();
                        nodes.dedup();
                        Val::V(Value::set_from_sorted(nodes.into_iter().map(|v| Value::pair(v.clone(), v)).collect()))
                    }
                    Some(1) => rel,
                    Some(k) => Val::lazy(Lazy::Iterate(rel, k as u64)),
                    None => return Err(EvalError::capacity(loc, format!("iterate count {n} too large"))),
                }
            }
            ExprKind::Image(r, s) => {
                let rel = self.eval(r, env)?;
                let set = self.eval(s, env)?;
                let mut out = Vec::new();
                for x in self.elems(&set, s.loc)?.iter() {
                    out.extend(self.image_of(&rel, x, loc)?);
                }
                Val::V(Value::set_from(out))
            }
            ExprKind::Apply(f, x) => {
                let fv = self.eval(f, env)?;
                let xv = self.value(x, env)?;
                Val::V(self.apply(&fv, &xv, f, loc)?)
            }
            ExprKind::Lambda {
                params,
                constraint,
                body,
            } => Val::lazy(Lazy::Lambda(Binder {
                vars: params,
                constraint,
                body: Some(body),
                captured: env.clone(),
            })),
            ExprKind::Comprehension {
                vars,
                constraint,
                output,
            } => Val::lazy(Lazy::Comp(Binder {
                vars,
                constraint,
                body: output.as_deref(),
                captured: env.clone(),
            })),
            ExprKind::BoolOf(p) => Val::V(Value::Bool(self.test(p, env)?)),
        })
    }

    fn binary(&self, op: BinOp, l: &'a Expr, r: &'a Expr, env: &mut Env<'a>, loc: Loc) -> R<Val<'a>> {
        let a = self.eval(l, env)?;
        let b = self.eval(r, env)?;
        let ints = || -> Option<(&Int, &Int)> {
            match (&a, &b) {
                (Val::V(Value::Int(x)), Val::V(Value::Int(y))) => Some((x, y)),
                _ => None,
            }
        };
        Ok(match op {
            BinOp::Plus | BinOp::Div | BinOp::Mod => {
                let (x, y) = ints().ok_or_else(|| wd_type(loc, "integers"))?;
                let res = match op {
                    BinOp::Plus => Some(x.add(y)),
                    BinOp::Div => x.div_floor(y),
                    _ => x.mod_floor(y),
                };
                Val::V(Value::Int(res.ok_or_else(|| EvalError::wd(loc, format!("division of {x} by zero")))?))
            }
            BinOp::Minus => match ints() {
                Some((x, y)) => Val::V(Value::Int(x.sub(y))),
                None => self.diff(a, b, loc)?,
            },
            BinOp::Times => match ints() {
                Some((x, y)) => Val::V(Value::Int(x.mul(y))),
                None => Val::lazy(Lazy::Cart(a, b)),
            },
            BinOp::Union => self.union(a, b, loc)?,
            BinOp::Inter => self.inter(a, b, loc)?,
            BinOp::FComp => {
                let mut out = Vec::new();
                for p in self.elems(&a, l.loc)?.iter() {
                    let (x, y) = p.as_pair().ok_or_else(|| wd_type(loc, "a relation"))?;
                    for z in self.image_of(&b, y, loc)? {
                        out.push(Value::pair(x.clone(), z));
                    }
                }
                Val::V(Value::set_from(out))
            }
            BinOp::PProd => match (&a, &b) {
                (Val::V(_), Val::V(_)) => Val::V(self.force_lazy(&Lazy::PProd(a.clone(), b.clone()), loc)?),
                _ => Val::lazy(Lazy::PProd(a, b)),
            },
            BinOp::DomRes | BinOp::RanRes => {
                let (set, rel) = if op == BinOp::DomRes { (&a, &b) } else { (&b, &a) };
                let mut out = Vec::new();
                for p in self.elems(rel, loc)?.iter() {
                    let (x, y) = p.as_pair().ok_or_else(|| wd_type(loc, "a relation"))?;
                    let key = if op == BinOp::DomRes { x } else { y };
                    if self.contains(set, key, loc)? {
                        out.push(p.clone());
                    }
                }
                Val::V(Value::set_from_sorted(out))
            }
            BinOp::Rel | BinOp::PFun | BinOp::TFun => Val::lazy(Lazy::Arrow(op, a, b)),
        })
    }

    fn union(&self, a: Val<'a>, b: Val<'a>, loc: Loc) -> R<Val<'a>> {
        Ok(match (&a, &b) {
            (Val::V(x), Val::V(y)) => {
                let (x, y) = (set_of(x, loc)?, set_of(y, loc)?);
                let mut out = Vec::with_capacity(x.len() + y.len());
                let (mut i, mut j) = (0, 0);
                while i < x.len() && j < y.len() {
                    match x[i].cmp(&y[j]) {
                        std::cmp::Ordering::Less => {
                            out.push(x[i].clone());
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            out.push(y[j].clone());
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            out.push(x[i].clone());
                            i += 1;
                            j += 1;
                        }
                    }
                }
                out.extend_from_slice(&x[i..]);
                out.extend_from_slice(&y[j..]);
                Val::V(Value::set_from_sorted(out))
            }
            _ => Val::lazy(Lazy::Union(a, b)),
        })
    }

    fn filter(&self, s: &[Value], other: &Val<'a>, keep: bool, loc: Loc) -> R<Val<'a>> {
        let mut out = Vec::new();
        for x in s {
            if self.contains(other, x, loc)? == keep {
                out.push(x.clone());
            }
        }
        Ok(Val::V(Value::set_from_sorted(out)))
    }

    fn inter(&self, a: Val<'a>, b: Val<'a>, loc: Loc) -> R<Val<'a>> {
        match (&a, &b) {
            (Val::V(x), Val::V(y)) => {
                let (x, y) = (set_of(x, loc)?, set_of(y, loc)?);
                let (small, big) = if x.len() <= y.len() { (x, y) } else { (y, x) };
                let out: Vec<Value> = small.iter().filter(|v| big.binary_search(v).is_ok()).cloned().collect();
                Ok(Val::V(Value::set_from_sorted(out)))
            }
            (Val::V(x), other) | (other, Val::V(x)) => self.filter(set_of(x, loc)?, other, true, loc),
            (Val::L(x), Val::L(y)) => match (&x.kind, &y.kind) {
                (Lazy::Interval(a1, b1), Lazy::Interval(a2, b2)) => {
                    let lo = a1.max(a2).clone();
                    let hi = b1.min(b2).clone();
                    Ok(if hi < lo {
                        Val::V(Value::empty_set())
                    } else {
                        Val::lazy(Lazy::Interval(lo, hi))
                    })
                }
                _ => Ok(Val::lazy(Lazy::Inter(a.clone(), b.clone()))),
            },
        }
    }

    fn diff(&self, a: Val<'a>, b: Val<'a>, loc: Loc) -> R<Val<'a>> {
        match &a {
            Val::V(x) => self.filter(set_of(x, loc)?, &b, false, loc),
            Val::L(_) => Ok(Val::lazy(Lazy::Diff(a, b))),
        }
    }

    fn unary(&self, op: UnOp, x: &'a Expr, env: &mut Env<'a>, loc: Loc) -> R<Val<'a>> {
        let v = self.eval(x, env)?;
        let pairs = |v: &Val<'a>| -> R<Vec<(Value, Value)>> {
            self.elems(v, x.loc)?
                .iter()
                .map(|p| {
                    p.as_pair()
                        .map(|(a, b)| (a.clone(), b.clone()))
                        .ok_or_else(|| wd_type(loc, "a relation"))
                })
                .collect()
        };
        Ok(match op {
            UnOp::Neg => Val::V(Value::Int(int_of(&self.force(&v, loc)?, loc)?.neg())),
            UnOp::Inverse => Val::V(Value::set_from(pairs(&v)?.into_iter().map(|(a, b)| Value::pair(b, a)).collect())),
            UnOp::Dom => {
                let mut d: Vec<Value> = pairs(&v)?.into_iter().map(|(a, _)| a).collect();
                d.dedup();
                Val::V(Value::set_from_sorted(d))
            }
            UnOp::Ran => Val::V(Value::set_from(pairs(&v)?.into_iter().map(|(_, b)| b).collect())),
            UnOp::Closure1 => match &v {
                Val::V(Value::Set(s)) if s.is_empty() => v,
                _ => Val::lazy(Lazy::Closure1(ClosureSet::new(v))),
            },
            UnOp::Card => Val::V(Value::Int(match &v {
                Val::L(l) if matches!(l.kind, Lazy::Interval(..)) => match &l.kind {
                    Lazy::Interval(lo, hi) => hi.sub(lo).add(&Int::from(1)),
                    _ => unreachable!(),
                },
                _ => Int::from(self.elems(&v, loc)?.len() as i64),
            })),
            UnOp::Min | UnOp::Max => {
                if let Val::L(l) = &v {
                    if let Lazy::Interval(lo, hi) = &l.kind {
                        return Ok(Val::V(Value::Int(if op == UnOp::Min { lo.clone() } else { hi.clone() })));
                    }
                }
                let s = self.elems(&v, loc)?;
                let pick = if op == UnOp::Min { s.first() } else { s.last() };
                let m = pick.ok_or_else(|| EvalError::wd(loc, "min or max of an empty set"))?;
                Val::V(Value::Int(int_of(m, loc)?.clone()))
            }
        })
    }

    fn apply(&self, f: &Val<'a>, x: &Value, fexpr: &Expr, loc: Loc) -> R<Value> {
        if let Val::L(l) = f {
            if let Lazy::Lambda(b) = &l.kind {
                return match self.lambda_at(b, x)? {
                    Some(v) => Ok(v),
                    None => Err(EvalError::wd(
                        loc,
                        format!("{} applied outside its domain: argument {}", text_expr(fexpr), self.render(x)),
                    )),
                };
            }
        }
        let imgs = self.image_of(f, x, loc)?;
        match imgs.len() {
            1 => Ok(imgs.into_iter().next().expect("one image")),
            0 => Err(EvalError::wd(
                loc,
                format!("{} applied outside its domain: argument {}", text_expr(fexpr), self.render(x)),
            )),
            n => Err(EvalError::wd(
                loc,
                format!("{} is not functional at {}: {n} images", text_expr(fexpr), self.render(x)),
            )),
        }
    }

    /// Applies an arbitrary function value to an argument.
    pub fn apply_value(&self, f: &Val<'a>, x: &Value) -> R<Value> {
        let loc = Loc::default();
        if let Val::L(l) = f {
            if let Lazy::Lambda(b) = &l.kind {
                return self
                    .lambda_at(b, x)?
                    .ok_or_else(|| EvalError::wd(loc, format!("argument {} outside the lambda domain", self.render(x))));
            }
        }
        let imgs = self.image_of(f, x, loc)?;
        match imgs.as_slice() {
            [v] => Ok(v.clone()),
            _ => Err(EvalError::wd(loc, format!("{} images at {}", imgs.len(), self.render(x)))),
        }
    }

    /// Binds `x` to the binder variables; `None` when it has the wrong shape.
    fn bind_args(&self, b: &Binder<'a>, x: &Value) -> Option<Env<'a>> {
        let parts = destructure(b.vars.len(), x)?;
        let mut env = b.captured.clone();
        for (name, v) in b.vars.iter().zip(parts) {
            env.push(name, Val::V(v));
        }
        Some(env)
    }

    /// Result of a lambda at `x`, or `None` outside its domain.
    fn lambda_at(&self, b: &Binder<'a>, x: &Value) -> R<Option<Value>> {
        let Some(mut env) = self.bind_args(b, x) else {
            return Ok(None);
        };
        if !self.test(b.constraint, &mut env)? {
            return Ok(None);
        }
        let body = b.body.expect("lambda body");
        Ok(Some(self.value(body, &mut env)?))
    }

    /// Expands a value to a canonical one.
    pub fn force(&self, v: &Val<'a>, loc: Loc) -> R<Value> {
        match v {
            Val::V(v) => Ok(v.clone()),
            Val::L(l) => l.forced.get_or_init(|| self.force_lazy(&l.kind, loc)).clone(),
        }
    }

    fn elems(&self, v: &Val<'a>, loc: Loc) -> R<Arc<Vec<Value>>> {
        let f = self.force(v, loc)?;
        set_of(&f, loc).cloned()
    }

    fn check_limit(&self, n: u128, what: &str, loc: Loc) -> R<()> {
        if n > self.opts.force_limit as u128 {
            Err(EvalError::capacity(
                loc,
                format!("{what} has {n} elements, above the limit of {}", self.opts.force_limit),
            ))
        } else {
            Ok(())
        }
    }

    fn force_lazy(&self, kind: &Lazy<'a>, loc: Loc) -> R<Value> {
        let out = match kind {
            Lazy::Interval(lo, hi) => {
                let (lo64, hi64) = match (lo.to_i64(), hi.to_i64()) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(EvalError::capacity(loc, "interval bounds out of range")),
                };
                self.check_limit((hi64 as i128 - lo64 as i128 + 1) as u128, "interval", loc)?;
                Value::set_from_sorted((lo64..=hi64).map(Value::int).collect())
            }
            Lazy::Builtin(b) => return Err(EvalError::capacity(loc, format!("{} cannot be enumerated", b.name()))),
            Lazy::Arrow(op, ..) => {
                return Err(EvalError::capacity(loc, format!("the set of relations `{}` cannot be enumerated", op.symbol())))
            }
            Lazy::Cart(a, b) => {
                let (x, y) = (self.elems(a, loc)?, self.elems(b, loc)?);
                self.check_limit(x.len() as u128 * y.len() as u128, "cartesian product", loc)?;
                let mut out = Vec::with_capacity(x.len() * y.len());
                for p in x.iter() {
                    for q in y.iter() {
                        out.push(Value::pair(p.clone(), q.clone()));
                    }
                }
                Value::set_from_sorted(out)
            }
            Lazy::PProd(a, b) => {
                let (x, y) = (self.elems(a, loc)?, self.elems(b, loc)?);
                self.check_limit(x.len() as u128 * y.len() as u128, "parallel product", loc)?;
                let mut out = Vec::with_capacity(x.len() * y.len());
                for p in x.iter() {
                    let (a1, b1) = p.as_pair().ok_or_else(|| wd_type(loc, "a relation"))?;
                    for q in y.iter() {
                        let (a2, b2) = q.as_pair().ok_or_else(|| wd_type(loc, "a relation"))?;
                        out.push(Value::pair(Value::pair(a1.clone(), a2.clone()), Value::pair(b1.clone(), b2.clone())));
                    }
                }
                Value::set_from(out)
            }
            Lazy::Closure1(c) => {
                let rel = self.elems(&c.rel, loc)?;
                let pairs = closure1_dense(&rel, self.opts.force_limit)
                    .map_err(|n| EvalError::capacity(loc, format!("closure1 exceeds {n} pairs")))?;
                Value::set_from_sorted(pairs)
            }
            Lazy::Iterate(r, n) => {
                let rel = self.elems(r, loc)?;
                let pairs = iterate_relation(&rel, *n, self.opts.force_limit)
                    .map_err(|n| EvalError::capacity(loc, format!("iterate exceeds {n} pairs")))?;
                Value::set_from_sorted(pairs)
            }
            Lazy::Lambda(b) | Lazy::Comp(b) => {
                let is_lambda = matches!(kind, Lazy::Lambda(_));
                let mut env = b.captured.clone();
                let mark = env.len();
                let conj = b.constraint.conjuncts();
                let mut out = Vec::new();
                let limit = self.opts.force_limit;
                let mut overflow = false;
                let _ = self.solve(b.vars, &conj, 0, &mut env, mark, &mut |env| {
                    let args: Vec<Value> = b
                        .vars
                        .iter()
                        .map(|v| self.force(env.get(v).expect("bound"), loc))
                        .collect::<R<_>>()?;
                    let item = match (is_lambda, b.body) {
                        (true, Some(body)) => Value::pair(tuple(&args), self.value(body, env)?),
                        (false, Some(output)) => self.value(output, env)?,
                        _ => tuple(&args),
                    };
                    out.push(item);
                    if out.len() > limit {
                        overflow = true;
                        return Ok(ControlFlow::Break(()));
                    }
                    Ok(ControlFlow::Continue(()))
                })?;
                if overflow {
                    return Err(EvalError::capacity(loc, format!("{} exceeds {limit} elements", kind.describe())));
                }
                Value::set_from(out)
            }
            Lazy::Union(a, b) => {
                let (x, y) = (self.force(a, loc)?, self.force(b, loc)?);
                match self.union(Val::V(x), Val::V(y), loc)? {
                    Val::V(v) => v,
                    Val::L(_) => unreachable!("union of finite sets is finite"),
                }
            }
            Lazy::Inter(a, b) => {
                let x = self.elems(a, loc)?;
                match self.filter(&x, b, true, loc)? {
                    Val::V(v) => v,
                    Val::L(_) => unreachable!(),
                }
            }
            Lazy::Diff(a, b) => {
                let x = self.elems(a, loc)?;
                match self.filter(&x, b, false, loc)? {
                    Val::V(v) => v,
                    Val::L(_) => unreachable!(),
                }
            }
        };
        if let Value::Set(s) = &out {
            self.counters.forced(s.len());
        }
        Ok(out)
    }

    /// Membership test that avoids expanding symbolic sets where possible.
    pub fn contains(&self, set: &Val<'a>, x: &Value, loc: Loc) -> R<bool> {
        let l = match set {
            Val::V(s) => return Ok(set_of(s, loc)?.binary_search(x).is_ok()),
            Val::L(l) => l,
        };
        if let Some(Ok(v)) = l.forced.get() {
            return Ok(v.set_contains(x));
        }
        match &l.kind {
            Lazy::Interval(lo, hi) => Ok(x.as_int().is_some_and(|i| lo <= i && i <= hi)),
            Lazy::Builtin(b) => Ok(match (b, x.as_int()) {
                (BuiltinSet::Integer, Some(_)) => true,
                (BuiltinSet::Natural, Some(i)) => !i.is_negative(),
                (BuiltinSet::Natural1, Some(i)) => !i.is_negative() && !i.is_zero(),
                (BuiltinSet::Bool, _) => x.as_bool().is_some(),
                _ => false,
            }),
            Lazy::Cart(a, b) => match x.as_pair() {
                Some((p, q)) => Ok(self.contains(a, p, loc)? && self.contains(b, q, loc)?),
                None => Ok(false),
            },
            Lazy::PProd(r1, r2) => {
                let parts = x
                    .as_pair()
                    .and_then(|(l, r)| Some((l.as_pair()?, r.as_pair()?)));
                match parts {
                    Some(((a, c), (b, d))) => Ok(self.contains(r1, &Value::pair(a.clone(), b.clone()), loc)?
                        && self.contains(r2, &Value::pair(c.clone(), d.clone()), loc)?),
                    None => Ok(false),
                }
            }
            Lazy::Closure1(c) => {
                let Some((src, dst)) = x.as_pair() else {
                    return Ok(false);
                };
                self.closure_search(c, src, Some(dst), loc).map(|r| r.is_some())
            }
            Lazy::Iterate(r, n) => {
                let Some((src, dst)) = x.as_pair() else {
                    return Ok(false);
                };
                Ok(self.frontier(r, src, *n, loc)?.binary_search(dst).is_ok())
            }
            Lazy::Lambda(b) => {
                let Some((arg, res)) = x.as_pair() else {
                    return Ok(false);
                };
                Ok(self.lambda_at(b, arg)?.as_ref() == Some(res))
            }
            Lazy::Comp(b) if b.body.is_none() => match self.bind_args(b, x) {
                Some(mut env) => self.test(b.constraint, &mut env),
                None => Ok(false),
            },
            Lazy::Comp(_) => Ok(self.force(set, loc)?.set_contains(x)),
            Lazy::Arrow(op, a, b) => self.arrow_contains(*op, a, b, x, loc),
            Lazy::Union(a, b) => Ok(self.contains(a, x, loc)? || self.contains(b, x, loc)?),
            Lazy::Inter(a, b) => Ok(self.contains(a, x, loc)? && self.contains(b, x, loc)?),
            Lazy::Diff(a, b) => Ok(self.contains(a, x, loc)? && !self.contains(b, x, loc)?),
        }
    }

    fn arrow_contains(&self, op: BinOp, a: &Val<'a>, b: &Val<'a>, f: &Value, loc: Loc) -> R<bool> {
        let Some(pairs) = f.as_set() else {
            return Ok(false);
        };
        for p in pairs {
            let Some((x, y)) = p.as_pair() else {
                return Ok(false);
            };
            if !self.contains(a, x, loc)? || !self.contains(b, y, loc)? {
                return Ok(false);
            }
        }
        if op == BinOp::Rel {
            return Ok(true);
        }
        let lefts = || pairs.iter().map(|p| p.as_pair().expect("pair").0);
        if lefts().zip(lefts().skip(1)).any(|(x, y)| x == y) {
            return Ok(false);
        }
        if op == BinOp::TFun {
            let domain = self.elems(a, loc)?;
            return Ok(domain.len() == pairs.len());
        }
        Ok(true)
    }

    /// Nodes reachable from `src` in exactly `n` steps, ascending.
    fn frontier(&self, rel: &Val<'a>, src: &Value, n: u64, loc: Loc) -> R<Vec<Value>> {
        let mut frontier = vec![src.clone()];
        for _ in 0..n {
            let mut next = Vec::new();
            for f in &frontier {
                next.extend(self.image_of(rel, f, loc)?);
            }
            next.sort_unstable();
            next.dedup();
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        Ok(frontier)
    }

    /// Breadth-first search in `closure1(rel)` from `src`. With a target,
    /// stops as soon as it is reached and returns an empty vector; without
    /// one, returns every reachable node in ascending order. `None` means the
    /// target is unreachable. Frequent targeted queries go through a
    /// reachability index instead.
    fn closure_search(&self, c: &ClosureSet<'a>, src: &Value, target: Option<&Value>, loc: Loc) -> R<Option<Vec<Value>>> {
        if let Some(t) = target {
            if c.queries.fetch_add(1, Ordering::Relaxed) >= INDEX_AFTER {
                let index = c.index.get_or_init(|| {
                    let rel = self.force(&c.rel, loc).ok()?;
                    let pairs = rel.as_set()?;
                    self.counters.enumerated(pairs.len());
                    Some(ReachIndex::new(pairs))
                });
                if let Some(index) = index {
                    let (hit, visited) = index.reaches(src, t);
                    self.counters.enumerated(visited);
                    return Ok(hit.then(Vec::new));
                }
            }
        }
        let mut bfs = c.take(src);
        loop {
            if let Some(t) = target {
                if bfs.visited.contains(t) {
                    c.put(src.clone(), bfs);
                    return Ok(Some(Vec::new()));
                }
            }
            let Some(n) = bfs.queue.pop_front() else {
                break;
            };
            let succ = self.image_of(&c.rel, &n, loc)?;
            self.counters.enumerated(succ.len());
            for m in succ {
                if !bfs.visited.contains(&m) {
                    bfs.visited.insert(m.clone());
                    bfs.queue.push_back(m);
                }
            }
        }
        debug_assert!(bfs.done());
        let out = if target.is_some() {
            None
        } else {
            let mut all: Vec<Value> = bfs.visited.iter().cloned().collect();
            all.sort_unstable();
            Some(all)
        };
        c.put(src.clone(), bfs);
        Ok(out)
    }

    /// `rel[{x}]` as an ascending vector.
    pub fn image_of(&self, rel: &Val<'a>, x: &Value, loc: Loc) -> R<Vec<Value>> {
        let l = match rel {
            Val::V(s) => return Ok(successors(set_of(s, loc)?, x).collect()),
            Val::L(l) => l,
        };
        if let Some(Ok(v)) = l.forced.get() {
            return Ok(successors(set_of(v, loc)?, x).collect());
        }
        match &l.kind {
            Lazy::Cart(a, b) => {
                if self.contains(a, x, loc)? {
                    Ok(self.elems(b, loc)?.to_vec())
                } else {
                    Ok(Vec::new())
                }
            }
            Lazy::PProd(r1, r2) => {
                let Some((a, c)) = x.as_pair() else {
                    return Ok(Vec::new());
                };
                let (bs, ds) = (self.image_of(r1, a, loc)?, self.image_of(r2, c, loc)?);
                let mut out = Vec::with_capacity(bs.len() * ds.len());
                for b in &bs {
                    for d in &ds {
                        out.push(Value::pair(b.clone(), d.clone()));
                    }
                }
                Ok(out)
            }
            Lazy::Closure1(c) => Ok(self.closure_search(c, x, None, loc)?.unwrap_or_default()),
            Lazy::Iterate(r, n) => self.frontier(r, x, *n, loc),
            Lazy::Lambda(b) => Ok(self.lambda_at(b, x)?.into_iter().collect()),
            Lazy::Comp(b) if b.body.is_none() && b.vars.len() >= 2 => {
                let n = b.vars.len();
                let Some(parts) = destructure(n - 1, x) else {
                    return Ok(Vec::new());
                };
                let mut env = b.captured.clone();
                for (name, v) in b.vars[..n - 1].iter().zip(parts) {
                    env.push(name, Val::V(v));
                }
                let mark = env.len();
                let last = &b.vars[n - 1..];
                let conj = b.constraint.conjuncts();
                let mut out = Vec::new();
                let _ = self.solve(last, &conj, 0, &mut env, mark, &mut |env| {
                    out.push(self.force(env.get(&last[0]).expect("bound"), loc)?);
                    Ok(ControlFlow::Continue(()))
                })?;
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
            Lazy::Union(a, b) => {
                let mut out = self.image_of(a, x, loc)?;
                out.extend(self.image_of(b, x, loc)?);
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
            _ => {
                let v = self.force(rel, loc)?;
                Ok(successors(set_of(&v, loc)?, x).collect())
            }
        }
    }

    /// Enumerates the bindings of `vars` satisfying the conjuncts from `idx`
    /// on. Conjuncts of the form `pattern : S` with an unbound pattern
    /// variable, or `x = E` with `x` unbound, generate bindings; the others
    /// filter. Variables bound after `mark` count as bound.
    #[allow(clippy::type_complexity)]
    fn solve(
        &self,
        vars: &'a [String],
        conj: &[&'a Pred],
        idx: usize,
        env: &mut Env<'a>,
        mark: usize,
        f: &mut dyn FnMut(&mut Env<'a>) -> R<ControlFlow<()>>,
    ) -> R<ControlFlow<()>> {
        let start = env.len();
        let res = self.solve_inner(vars, conj, idx, env, mark, f);
        env.truncate(start);
        res
    }

    fn solve_inner(
        &self,
        vars: &'a [String],
        conj: &[&'a Pred],
        idx: usize,
        env: &mut Env<'a>,
        mark: usize,
        f: &mut dyn FnMut(&mut Env<'a>) -> R<ControlFlow<()>>,
    ) -> R<ControlFlow<()>> {
        if idx == conj.len() {
            return f(env);
        }
        let c = conj[idx];
        let unbound = |env: &Env<'a>, n: &str| vars.iter().any(|v| v == n) && !env.bound_since(mark, n);
        match &c.kind {
            PredKind::Cmp(CmpOp::Member, lhs, rhs)
                if pattern_vars(lhs).is_some_and(|pv| pv.iter().any(|v| unbound(env, v))) =>
            {
                let set = self.eval(rhs, env)?;
                let (pattern, candidates): (&'a Expr, Vec<Value>) = match &lhs.kind {
                    ExprKind::Pair(l, r)
                        if pattern_vars(l).is_some_and(|pv| pv.iter().all(|v| !unbound(env, v))) =>
                    {
                        let key = self.value(l, env)?;
                        (r, self.image_of(&set, &key, rhs.loc)?)
                    }
                    _ => (lhs, self.elems(&set, rhs.loc)?.to_vec()),
                };
                for cand in &candidates {
                    let before = env.len();
                    if self.bind_pattern(pattern, cand, env, vars, mark)? {
                        let flow = self.solve_inner(vars, conj, idx + 1, env, mark, f)?;
                        env.truncate(before);
                        if flow.is_break() {
                            return Ok(flow);
                        }
                    } else {
                        env.truncate(before);
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
            PredKind::Cmp(CmpOp::Eq, lhs, rhs) if lhs.as_ident().is_some_and(|n| unbound(env, n)) => {
                let name = lhs.as_ident().expect("identifier");
                let name: &'a str = vars.iter().find(|v| *v == name).expect("quantified variable");
                let v = self.eval(rhs, env)?;
                let before = env.len();
                env.push(name, v);
                let flow = self.solve_inner(vars, conj, idx + 1, env, mark, f);
                env.truncate(before);
                flow
            }
            _ => {
                if self.test(c, env)? {
                    self.solve_inner(vars, conj, idx + 1, env, mark, f)
                } else {
                    Ok(ControlFlow::Continue(()))
                }
            }
        }
    }

    fn bind_pattern(&self, pat: &'a Expr, v: &Value, env: &mut Env<'a>, vars: &'a [String], mark: usize) -> R<bool> {
        match &pat.kind {
            ExprKind::Ident(n) => {
                let quantified = vars.iter().find(|q| *q == n);
                match quantified {
                    Some(q) if !env.bound_since(mark, q) => {
                        env.push(q, Val::V(v.clone()));
                        Ok(true)
                    }
                    _ => {
                        let cur = self.lookup(n, env, pat.loc)?;
                        Ok(self.force(&cur, pat.loc)? == *v)
                    }
                }
            }
            ExprKind::Pair(l, r) => match v.as_pair() {
                Some((a, b)) => Ok(self.bind_pattern(l, a, env, vars, mark)? && self.bind_pattern(r, b, env, vars, mark)?),
                None => Ok(false),
            },
            _ => unreachable!("patterns are identifiers and pairs"),
        }
    }

    fn equal(&self, a: &Val<'a>, b: &Val<'a>, loc: Loc) -> R<bool> {
        match (a, b) {
            (Val::V(x), Val::V(y)) => Ok(x == y),
            _ => Ok(self.force(a, loc)? == self.force(b, loc)?),
        }
    }

    fn compare(&self, op: CmpOp, a: &Val<'a>, b: &Val<'a>, loc: Loc) -> R<bool> {
        match op {
            CmpOp::Member | CmpOp::NotMember => {
                let x = self.force(a, loc)?;
                Ok(self.contains(b, &x, loc)? == (op == CmpOp::Member))
            }
            CmpOp::Subset | CmpOp::NotSubset => {
                let mut all = true;
                for x in self.elems(a, loc)?.iter() {
                    if !self.contains(b, x, loc)? {
                        all = false;
                        break;
                    }
                }
                Ok(all == (op == CmpOp::Subset))
            }
            CmpOp::Eq => self.equal(a, b, loc),
            CmpOp::Neq => Ok(!self.equal(a, b, loc)?),
            _ => {
                let (x, y) = (self.force(a, loc)?, self.force(b, loc)?);
                let (x, y) = (int_of(&x, loc)?, int_of(&y, loc)?);
                Ok(match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Gt => x > y,
                    _ => x >= y,
                })
            }
        }
    }

    fn quantifier_parts(p: &'a Pred) -> (&'a [String], Vec<&'a Pred>, Option<&'a Pred>) {
        match &p.kind {
            PredKind::ForAll(vars, body) => match &body.kind {
                PredKind::Implies(d, q) => (vars, d.conjuncts(), Some(q)),
                _ => unreachable!("universal body is an implication"),
            },
            PredKind::Exists(vars, body) => (vars, body.conjuncts(), None),
            _ => unreachable!(),
        }
    }

    fn test(&self, p: &'a Pred, env: &mut Env<'a>) -> R<bool> {
        match &p.kind {
            PredKind::Cmp(op, l, r) => {
                let a = self.eval(l, env)?;
                let b = self.eval(r, env)?;
                self.compare(*op, &a, &b, p.loc)
            }
            PredKind::And(a, b) => Ok(self.test(a, env)? && self.test(b, env)?),
            PredKind::Or(a, b) => Ok(self.test(a, env)? || self.test(b, env)?),
            PredKind::Implies(a, b) => Ok(!self.test(a, env)? || self.test(b, env)?),
            PredKind::Equiv(a, b) => Ok(self.test(a, env)? == self.test(b, env)?),
            PredKind::Not(a) => Ok(!self.test(a, env)?),
            PredKind::ForAll(..) | PredKind::Exists(..) => {
                let (vars, domain, body) = Self::quantifier_parts(p);
                let mark = env.len();
                let mut failed = false;
                let flow = self.solve(vars, &domain, 0, env, mark, &mut |env| match body {
                    Some(q) => {
                        if self.test(q, env)? {
                            Ok(ControlFlow::Continue(()))
                        } else {
                            failed = true;
                            Ok(ControlFlow::Break(()))
                        }
                    }
                    None => Ok(ControlFlow::Break(())),
                })?;
                Ok(match body {
                    Some(_) => !failed,
                    None => flow.is_break(),
                })
            }
        }
    }

    /// Verdict of a closed predicate.
    pub fn holds(&self, p: &'a Pred) -> Truth {
        match self.test(p, &mut Env::default()) {
            Ok(b) => Truth::from_bool(b),
            Err(_) => Truth::WdError,
        }
    }

    /// Verdict of a closed predicate with its evaluation trace.
    pub fn trace_pred(&self, p: &'a Pred) -> PredTrace {
        self.trace(p, &mut Env::default())
    }

    fn node(&self, p: &Pred, kind: &str, verdict: Truth) -> PredTrace {
        PredTrace {
            kind: kind.to_string(),
            text: text_pred(p),
            line: p.loc.line,
            col: p.loc.col,
            verdict,
            detail: None,
            witness: None,
            children: Vec::new(),
        }
    }

    fn trace(&self, p: &'a Pred, env: &mut Env<'a>) -> PredTrace {
        let mark = env.len();
        let t = self.trace_inner(p, env);
        env.truncate(mark);
        t
    }

    fn trace_inner(&self, p: &'a Pred, env: &mut Env<'a>) -> PredTrace {
        match &p.kind {
            PredKind::Cmp(op, l, r) => {
                let operands = self.eval(l, env).and_then(|a| Ok((a, self.eval(r, env)?)));
                let res = operands
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|(a, b)| self.compare(*op, a, b, p.loc));
                let mut t = self.node(p, "cmp", res.as_ref().map_or(Truth::WdError, |b| Truth::from_bool(*b)));
                t.detail = Some(match (&res, &operands) {
                    (Err(e), _) => e.to_string(),
                    (Ok(_), Ok((a, b))) => format!("{} {} {}", self.render_val(a), op.symbol(), self.render_val(b)),
                    (Ok(_), Err(_)) => unreachable!(),
                });
                t
            }
            PredKind::And(a, b) | PredKind::Or(a, b) | PredKind::Implies(a, b) => {
                let kind = match &p.kind {
                    PredKind::And(..) => "and",
                    PredKind::Or(..) => "or",
                    _ => "implies",
                };
                let ta = self.trace(a, env);
                let stop = match (kind, ta.verdict) {
                    (_, Truth::WdError) => Some(Truth::WdError),
                    ("and", Truth::False) => Some(Truth::False),
                    ("or", Truth::True) => Some(Truth::True),
                    ("implies", Truth::False) => Some(Truth::True),
                    _ => None,
                };
                match stop {
                    Some(v) => {
                        let mut t = self.node(p, kind, v);
                        t.children.push(ta);
                        t
                    }
                    None => {
                        let tb = self.trace(b, env);
                        let mut t = self.node(p, kind, tb.verdict);
                        t.children = vec![ta, tb];
                        t
                    }
                }
            }
            PredKind::Equiv(a, b) => {
                let ta = self.trace(a, env);
                if ta.verdict == Truth::WdError {
                    let mut t = self.node(p, "equiv", Truth::WdError);
                    t.children.push(ta);
                    return t;
                }
                let tb = self.trace(b, env);
                let v = match tb.verdict {
                    Truth::WdError => Truth::WdError,
                    v => Truth::from_bool(v == ta.verdict),
                };
                let mut t = self.node(p, "equiv", v);
                t.children = vec![ta, tb];
                t
            }
            PredKind::Not(a) => {
                let ta = self.trace(a, env);
                let v = match ta.verdict {
                    Truth::True => Truth::False,
                    Truth::False => Truth::True,
                    Truth::WdError => Truth::WdError,
                };
                let mut t = self.node(p, "not", v);
                t.children.push(ta);
                t
            }
            PredKind::ForAll(..) | PredKind::Exists(..) => self.trace_quantifier(p, env),
        }
    }

    fn trace_quantifier(&self, p: &'a Pred, env: &mut Env<'a>) -> PredTrace {
        let (vars, domain, body) = Self::quantifier_parts(p);
        let universal = body.is_some();
        let kind = if universal { "forall" } else { "exists" };
        let mark = env.len();
        let mut instances = 0u64;
        let mut first: Option<Vec<(&'a str, Val<'a>)>> = None;
        let mut chosen: Option<Vec<(&'a str, Val<'a>)>> = None;
        let res = self.solve(vars, &domain, 0, env, mark, &mut |env| {
            instances += 1;
            let snapshot = env.vars[mark..].to_vec();
            let Some(q) = body else {
                chosen = Some(snapshot);
                return Ok(ControlFlow::Break(()));
            };
            if first.is_none() {
                first = Some(snapshot.clone());
            }
            match self.test(q, env) {
                Ok(true) => Ok(ControlFlow::Continue(())),
                Ok(false) | Err(_) => {
                    chosen = Some(snapshot);
                    Ok(ControlFlow::Break(()))
                }
            }
        });
        env.truncate(mark);
        if let Err(e) = res {
            let mut t = self.node(p, kind, Truth::WdError);
            t.detail = Some(e.to_string());
            return t;
        }
        let render_bindings = |b: &[(&'a str, Val<'a>)]| -> Vec<(String, String)> {
            vars.iter()
                .filter_map(|v| b.iter().rev().find(|(n, _)| n == v).map(|(n, val)| (n.to_string(), self.render_val(val))))
                .collect()
        };
        let (witness_kind, bindings) = match (universal, chosen, first) {
            (true, Some(b), _) => (WitnessKind::Counterexample, Some(b)),
            (true, None, Some(b)) => (WitnessKind::Sample, Some(b)),
            (false, Some(b), _) => (WitnessKind::Example, Some(b)),
            (false, None, _) => (WitnessKind::Exhausted, None),
            (true, None, None) => {
                let mut t = self.node(p, kind, Truth::True);
                t.detail = Some("empty domain".into());
                t.witness = Some(Witness {
                    kind: WitnessKind::Sample,
                    bindings: Vec::new(),
                    instances: 0,
                });
                return t;
            }
        };
        let Some(b) = bindings else {
            let mut t = self.node(p, kind, Truth::False);
            t.witness = Some(Witness {
                kind: witness_kind,
                bindings: Vec::new(),
                instances,
            });
            return t;
        };
        let rendered = render_bindings(&b);
        for (n, v) in b {
            env.push(n, v);
        }
        let inner = match &p.kind {
            PredKind::ForAll(_, body) => match &body.kind {
                PredKind::Implies(_, q) => q,
                _ => unreachable!(),
            },
            PredKind::Exists(_, body) => body,
            _ => unreachable!(),
        };
        let child = self.trace(inner, env);
        env.truncate(mark);
        let mut t = self.node(p, kind, child.verdict);
        t.witness = Some(Witness {
            kind: witness_kind,
            bindings: rendered,
            instances,
        });
        t.children.push(child);
        t
    }
}
