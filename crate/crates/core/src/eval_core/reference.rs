//! Eager reference evaluator. Every set is materialized in full, closures are
//! computed by repeated squaring, and only lambdas, built-in integer sets and
//! relation-set arrows stay symbolic.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::dataset_io::Dataset;
use crate::spec_lang::{BinOp, BuiltinSet, CmpOp, Expr, ExprKind, Loc, Pred, PredKind, SpecModel, UnOp};
use crate::value::{relation_slice, Atom, Int, Value};

use super::Truth;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefError {
    #[error("well-definedness error at {loc}: {message}")]
    Wd { loc: Loc, message: String },
    #[error("reference bound exceeded at {loc}: {message}")]
    Capacity { loc: Loc, message: String },
}

type R<T> = Result<T, RefError>;

fn wd(loc: Loc, message: impl Into<String>) -> RefError {
    RefError::Wd {
        loc,
        message: message.into(),
    }
}

fn cap(loc: Loc, message: impl Into<String>) -> RefError {
    RefError::Capacity {
        loc,
        message: message.into(),
    }
}

#[derive(Clone)]
enum RVal<'a> {
    V(Value),
    Builtin(BuiltinSet),
    Arrow(BinOp, Box<RVal<'a>>, Box<RVal<'a>>),
    Lambda {
        params: &'a [String],
        constraint: &'a Pred,
        body: &'a Expr,
        env: Vec<(&'a str, RVal<'a>)>,
    },
}

type Env<'a> = Vec<(&'a str, RVal<'a>)>;

pub struct RefEngine<'a> {
    model: &'a SpecModel,
    globals: HashMap<&'a str, Value>,
    defs: HashMap<&'a str, (&'a Expr, OnceLock<R<RVal<'a>>>)>,
    bound: usize,
}

fn split(n: usize, v: &Value) -> Option<Vec<Value>> {
    if n == 1 {
        return Some(vec![v.clone()]);
    }
    let (l, r) = v.as_pair()?;
    let mut out = split(n - 1, l)?;
    out.push(r.clone());
    Some(out)
}

impl<'a> RefEngine<'a> {
    /// `bound` caps the size of every materialized set.
    pub fn new(model: &'a SpecModel, data: &'a Dataset, bound: usize) -> Self {
        let mut globals = HashMap::new();
        for s in &model.sets {
            let Some(id) = data.universes.id(&s.name) else {
                continue;
            };
            let u = data.universes.get(id);
            let all: Vec<Value> = (0..u.len() as u32).map(|index| Value::Atom(Atom { set: id, index })).collect();
            for (i, el) in s.elements.iter().flatten().enumerate() {
                if let Some(index) = u.lookup(el) {
                    debug_assert_eq!(index as usize, i);
                    globals.insert(el.as_str(), Value::Atom(Atom { set: id, index }));
                }
            }
            globals.insert(s.name.as_str(), Value::set_from(all));
        }
        for c in &model.constants {
            if let Some(v) = data.value(&c.name) {
                globals.insert(c.name.as_str(), v.clone());
            }
        }
        let defs = model
            .definitions
            .iter()
            .map(|d| (d.name.as_str(), (&d.body, OnceLock::new())))
            .collect();
        RefEngine {
            model,
            globals,
            defs,
            bound,
        }
    }

    pub fn model(&self) -> &'a SpecModel {
        self.model
    }

    /// Verdict of a closed predicate. Well-definedness failures are a
    /// verdict; exceeding the bound is an error.
    pub fn holds(&self, p: &'a Pred) -> Result<Truth, RefError> {
        match self.pred(p, &mut Vec::new()) {
            Ok(b) => Ok(Truth::from_bool(b)),
            Err(RefError::Wd { .. }) => Ok(Truth::WdError),
            Err(e) => Err(e),
        }
    }

    /// Fully evaluated value of a closed expression.
    pub fn value_of(&self, e: &'a Expr) -> R<Value> {
        self.val(e, &mut Vec::new())
    }

    fn sized(&self, elems: Vec<Value>, loc: Loc) -> R<Value> {
        if elems.len() > self.bound {
            return Err(cap(loc, format!("set of {} elements", elems.len())));
        }
        Ok(Value::set_from(elems))
    }

    fn val(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Value> {
        match self.eval(e, env)? {
            RVal::V(v) => Ok(v),
            RVal::Lambda {
                params,
                constraint,
                body,
                env: captured,
            } => self.lambda_graph(params, constraint, body, captured, e.loc),
            _ => Err(cap(e.loc, "infinite set")),
        }
    }

    fn set(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Arc<Vec<Value>>> {
        match self.val(e, env)? {
            Value::Set(s) => Ok(s),
            _ => Err(wd(e.loc, "expected a set")),
        }
    }

    fn int(&self, e: &'a Expr, env: &mut Env<'a>) -> R<Int> {
        match self.val(e, env)? {
            Value::Int(i) => Ok(i),
            _ => Err(wd(e.loc, "expected an integer")),
        }
    }

    fn pairs(s: &[Value], loc: Loc) -> R<Vec<(Value, Value)>> {
        s.iter()
            .map(|p| {
                p.as_pair()
                    .map(|(a, b)| (a.clone(), b.clone()))
                    .ok_or_else(|| wd(loc, "expected a relation"))
            })
            .collect()
    }

    fn lookup(&self, name: &str, env: &Env<'a>, loc: Loc) -> R<RVal<'a>> {
        if let Some((_, v)) = env.iter().rev().find(|(n, _)| *n == name) {
            return Ok(v.clone());
        }
        if let Some(v) = self.globals.get(name) {
            return Ok(RVal::V(v.clone()));
        }
        match self.defs.get(name) {
            Some((body, cell)) => cell.get_or_init(|| self.eval(body, &mut Vec::new())).clone(),
            None => Err(cap(loc, format!("`{name}` has no value"))),
        }
    }

    fn eval(&self, e: &'a Expr, env: &mut Env<'a>) -> R<RVal<'a>> {
        let loc = e.loc;
        let v = match &e.kind {
            ExprKind::Int(b) => Value::Int(Int::from(b.clone())),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Ident(n) => return self.lookup(n, env, loc),
            ExprKind::Builtin(BuiltinSet::Bool) => Value::set_from(vec![Value::Bool(true), Value::Bool(false)]),
            ExprKind::Builtin(b) => return Ok(RVal::Builtin(*b)),
            ExprKind::Pair(l, r) => Value::pair(self.val(l, env)?, self.val(r, env)?),
            ExprKind::SetExt(items) => {
                let elems = items.iter().map(|i| self.val(i, env)).collect::<R<Vec<_>>>()?;
                self.sized(elems, loc)?
            }
            ExprKind::Interval(lo, hi) => {
                let (lo, hi) = (self.int(lo, env)?, self.int(hi, env)?);
                let mut out = Vec::new();
                let mut i = lo;
                while i <= hi {
                    if out.len() >= self.bound {
                        return Err(cap(loc, "interval too large"));
                    }
                    out.push(Value::Int(i.clone()));
                    i = i.add(&Int::from(1));
                }
                Value::set_from(out)
            }
            ExprKind::Binary(op, l, r) if op.is_arrow() => {
                return Ok(RVal::Arrow(*op, Box::new(self.eval(l, env)?), Box::new(self.eval(r, env)?)))
            }
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, env, loc)?,
            ExprKind::Unary(op, x) => self.unary(*op, x, env, loc)?,
            ExprKind::Iterate(r, n) => {
                let rel = self.set(r, env)?;
                let n = self.int(n, env)?;
                if n.is_negative() {
                    return Err(wd(loc, "negative iteration count"));
                }
                let pairs = Self::pairs(&rel, loc)?;
                let mut nodes: Vec<Value> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
                nodes.sort();
                nodes.dedup();
                let mut acc: Vec<Value> = nodes.into_iter().map(|x| Value::pair(x.clone(), x)).collect();
                let mut k = Int::from(0);
                while k < n {
                    acc = self.compose(&acc, &rel, loc)?;
                    k = k.add(&Int::from(1));
                    if acc.is_empty() {
                        break;
                    }
                }
                Value::set_from(acc)
            }
            ExprKind::Image(r, s) => {
                let s = self.set(s, env)?;
                match self.eval(r, env)? {
                    RVal::V(Value::Set(rel)) => {
                        if rel.first().is_some_and(|q| q.as_pair().is_none()) {
                            return Err(wd(loc, "expected a relation"));
                        }
                        let mut out = Vec::new();
                        for a in s.iter() {
                            for q in relation_slice(&rel, a) {
                                out.push(q.as_pair().ok_or_else(|| wd(loc, "expected a relation"))?.1.clone());
                            }
                            if out.len() > self.bound.saturating_mul(4) {
                                return Err(cap(loc, "image too large"));
                            }
                        }
                        self.sized(out, loc)?
                    }
                    f @ RVal::Lambda { .. } => {
                        let mut out = Vec::new();
                        for x in s.iter() {
                            if let Some(y) = self.call(&f, x, loc)? {
                                out.push(y);
                            }
                        }
                        Value::set_from(out)
                    }
                    _ => return Err(cap(loc, "image of a non-finite relation")),
                }
            }
            ExprKind::Apply(f, x) => {
                let fv = self.eval(f, env)?;
                let xv = self.val(x, env)?;
                match &fv {
                    RVal::Lambda { .. } => self
                        .call(&fv, &xv, loc)?
                        .ok_or_else(|| wd(loc, "function applied outside its domain"))?,
                    RVal::V(Value::Set(rel)) => {
                        let imgs: Vec<&Value> = relation_slice(rel, &xv)
                            .iter()
                            .filter_map(|p| p.as_pair().map(|(_, b)| b))
                            .collect();
                        match imgs.as_slice() {
                            [y] => (*y).clone(),
                            [] => return Err(wd(loc, "function applied outside its domain")),
                            _ => return Err(wd(loc, "function is not functional at its argument")),
                        }
                    }
                    RVal::V(_) => return Err(wd(loc, "application of a non-relation")),
                    _ => return Err(cap(loc, "application of an infinite relation")),
                }
            }
            ExprKind::Lambda {
                params,
                constraint,
                body,
            } => {
                return Ok(RVal::Lambda {
                    params,
                    constraint,
                    body,
                    env: env.clone(),
                })
            }
            ExprKind::Comprehension {
                vars,
                constraint,
                output,
            } => {
                let mut out = Vec::new();
                let conj = constraint.conjuncts();
                let base = env.len();
                self.enumerate(vars, &conj, env, base, &mut |env| {
                    let item = match output {
                        Some(o) => self.val(o, env)?,
                        None => {
                            let vals = vars
                                .iter()
                                .map(|v| self.val_of_var(v, env, loc))
                                .collect::<R<Vec<_>>>()?;
                            let mut it = vals.into_iter();
                            let first = it.next().expect("non-empty binder");
                            it.fold(first, Value::pair)
                        }
                    };
                    out.push(item);
                    if out.len() > self.bound {
                        return Err(cap(loc, "comprehension too large"));
                    }
                    Ok(true)
                })?;
                Value::set_from(out)
            }
            ExprKind::BoolOf(p) => Value::Bool(self.pred(p, env)?),
        };
        Ok(RVal::V(v))
    }

    fn val_of_var(&self, name: &str, env: &Env<'a>, loc: Loc) -> R<Value> {
        match env.iter().rev().find(|(n, _)| *n == name) {
            Some((_, RVal::V(v))) => Ok(v.clone()),
            _ => Err(cap(loc, format!("`{name}` is not a finite value"))),
        }
    }

    fn compose(&self, a: &[Value], b: &[Value], loc: Loc) -> R<Vec<Value>> {
        if b.first().is_some_and(|q| q.as_pair().is_none()) {
            return Err(wd(loc, "expected a relation"));
        }
        let mut out = Vec::new();
        for (x, y) in Self::pairs(a, loc)? {
            for q in relation_slice(b, &y) {
                let (_, z) = q.as_pair().ok_or_else(|| wd(loc, "expected a relation"))?;
                out.push(Value::pair(x.clone(), z.clone()));
            }
            if out.len() > self.bound.saturating_mul(4) {
                return Err(cap(loc, "composition too large"));
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.len() > self.bound {
            return Err(cap(loc, format!("set of {} elements", out.len())));
        }
        Ok(out)
    }

    fn binary(&self, op: BinOp, l: &'a Expr, r: &'a Expr, env: &mut Env<'a>, loc: Loc) -> R<Value> {
        let a = self.val(l, env)?;
        let b = self.val(r, env)?;
        if let (Value::Int(x), Value::Int(y)) = (&a, &b) {
            return Ok(Value::Int(match op {
                BinOp::Plus => x.add(y),
                BinOp::Minus => x.sub(y),
                BinOp::Times => x.mul(y),
                BinOp::Div => x.div_floor(y).ok_or_else(|| wd(loc, "division by zero"))?,
                BinOp::Mod => x.mod_floor(y).ok_or_else(|| wd(loc, "modulo by zero"))?,
                _ => return Err(wd(loc, "set operator on integers")),
            }));
        }
        let (Value::Set(x), Value::Set(y)) = (&a, &b) else {
            return Err(wd(loc, "expected sets"));
        };
        let out: Vec<Value> = match op {
            BinOp::Union => x.iter().chain(y.iter()).cloned().collect(),
            BinOp::Inter => x.iter().filter(|v| y.binary_search(v).is_ok()).cloned().collect(),
            BinOp::Minus => x.iter().filter(|v| y.binary_search(v).is_err()).cloned().collect(),
            BinOp::Times => {
                if x.len().saturating_mul(y.len()) > self.bound {
                    return Err(cap(loc, "cartesian product too large"));
                }
                x.iter()
                    .flat_map(|p| y.iter().map(move |q| Value::pair(p.clone(), q.clone())))
                    .collect()
            }
            BinOp::FComp => return Ok(Value::set_from(self.compose(x, y, loc)?)),
            BinOp::PProd => {
                let (px, py) = (Self::pairs(x, loc)?, Self::pairs(y, loc)?);
                if px.len().saturating_mul(py.len()) > self.bound {
                    return Err(cap(loc, "parallel product too large"));
                }
                let mut out = Vec::new();
                for (a1, b1) in &px {
                    for (a2, b2) in &py {
                        out.push(Value::pair(
                            Value::pair(a1.clone(), a2.clone()),
                            Value::pair(b1.clone(), b2.clone()),
                        ));
                    }
                }
                out
            }
            BinOp::DomRes => Self::pairs(y, loc)?
                .into_iter()
                .filter(|(d, _)| x.binary_search(d).is_ok())
                .map(|(d, r)| Value::pair(d, r))
                .collect(),
            BinOp::RanRes => Self::pairs(x, loc)?
                .into_iter()
                .filter(|(_, r)| y.binary_search(r).is_ok())
                .map(|(d, r)| Value::pair(d, r))
                .collect(),
            _ => return Err(wd(loc, "arithmetic on sets")),
        };
        self.sized(out, loc)
    }

    fn unary(&self, op: UnOp, x: &'a Expr, env: &mut Env<'a>, loc: Loc) -> R<Value> {
        if op == UnOp::Neg {
            return Ok(Value::Int(self.int(x, env)?.neg()));
        }
        let s = self.set(x, env)?;
        Ok(match op {
            UnOp::Inverse => Value::set_from(Self::pairs(&s, loc)?.into_iter().map(|(a, b)| Value::pair(b, a)).collect()),
            UnOp::Dom => Value::set_from(Self::pairs(&s, loc)?.into_iter().map(|(a, _)| a).collect()),
            UnOp::Ran => Value::set_from(Self::pairs(&s, loc)?.into_iter().map(|(_, b)| b).collect()),
            UnOp::Closure1 => {
                // pairs found in the last round, extended by one step each round
                let mut c: BTreeSet<Value> = s.iter().cloned().collect();
                let mut fresh = s.to_vec();
                while !fresh.is_empty() {
                    fresh = self
                        .compose(&fresh, &s, loc)?
                        .into_iter()
                        .filter(|p| c.insert(p.clone()))
                        .collect();
                    if c.len() > self.bound {
                        return Err(cap(loc, format!("set of {} elements", c.len())));
                    }
                }
                Value::set_from_sorted(c.into_iter().collect())
            }
            UnOp::Card => Value::int(s.len() as i64),
            UnOp::Min | UnOp::Max => {
                let mut ints = Vec::with_capacity(s.len());
                for v in s.iter() {
                    ints.push(v.as_int().ok_or_else(|| wd(loc, "expected integers"))?.clone());
                }
                let m = if op == UnOp::Min { ints.into_iter().min() } else { ints.into_iter().max() };
                Value::Int(m.ok_or_else(|| wd(loc, "extremum of an empty set"))?)
            }
            UnOp::Neg => unreachable!(),
        })
    }

    /// Result of a lambda at `x`, `None` outside its domain. Other values
    /// are applied through their graph.
    fn call(&self, f: &RVal<'a>, x: &Value, loc: Loc) -> R<Option<Value>> {
        let RVal::Lambda {
            params,
            constraint,
            body,
            env,
        } = f
        else {
            return Err(cap(loc, "not a lambda"));
        };
        let Some(parts) = split(params.len(), x) else {
            return Ok(None);
        };
        let mut env = env.clone();
        for (p, v) in params.iter().zip(parts) {
            env.push((p, RVal::V(v)));
        }
        if !self.pred(constraint, &mut env)? {
            return Ok(None);
        }
        Ok(Some(self.val(body, &mut env)?))
    }

    fn lambda_graph(
        &self,
        params: &'a [String],
        constraint: &'a Pred,
        body: &'a Expr,
        mut env: Env<'a>,
        loc: Loc,
    ) -> R<Value> {
        let conj = constraint.conjuncts();
        let base = env.len();
        let mut out = Vec::new();
        self.enumerate(params, &conj, &mut env, base, &mut |env| {
            let args = params.iter().map(|p| self.val_of_var(p, env, loc)).collect::<R<Vec<_>>>()?;
            let mut it = args.into_iter();
            let first = it.next().expect("non-empty binder");
            let arg = it.fold(first, Value::pair);
            out.push(Value::pair(arg, self.val(body, env)?));
            if out.len() > self.bound {
                return Err(cap(loc, "lambda graph too large"));
            }
            Ok(true)
        })?;
        Ok(Value::set_from(out))
    }

    fn is_free(vars: &[String], env: &Env<'a>, base: usize, name: &str) -> bool {
        vars.iter().any(|v| v == name) && !env[base..].iter().any(|(n, _)| *n == name)
    }

    fn has_free(vars: &[String], env: &Env<'a>, base: usize, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Ident(n) => Self::is_free(vars, env, base, n),
            ExprKind::Pair(l, r) => Self::has_free(vars, env, base, l) || Self::has_free(vars, env, base, r),
            _ => false,
        }
    }

    fn is_pattern(e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Ident(_) => true,
            ExprKind::Pair(l, r) => Self::is_pattern(l) && Self::is_pattern(r),
            _ => false,
        }
    }

    /// Calls `f` for each binding of `vars` satisfying the conjuncts, in
    /// ascending generator order. `f` returns `false` to stop; the result is
    /// `false` when stopped.
    fn enumerate(
        &self,
        vars: &'a [String],
        conj: &[&'a Pred],
        env: &mut Env<'a>,
        base: usize,
        f: &mut dyn FnMut(&mut Env<'a>) -> R<bool>,
    ) -> R<bool> {
        let Some((c, rest)) = conj.split_first() else {
            return f(env);
        };
        let start = env.len();
        let res = match &c.kind {
            PredKind::Cmp(CmpOp::Member, lhs, rhs) if Self::is_pattern(lhs) && Self::has_free(vars, env, base, lhs) => {
                let set = self.set(rhs, env)?;
                let mut go_on = true;
                for cand in set.iter() {
                    if self.match_pattern(lhs, cand, vars, env, base)? {
                        go_on = self.enumerate(vars, rest, env, base, f)?;
                    }
                    env.truncate(start);
                    if !go_on {
                        break;
                    }
                }
                Ok(go_on)
            }
            PredKind::Cmp(CmpOp::Eq, lhs, rhs)
                if lhs.as_ident().is_some_and(|n| Self::is_free(vars, env, base, n)) =>
            {
                let n = lhs.as_ident().expect("identifier");
                let name: &'a str = vars.iter().find(|v| *v == n).expect("binder variable");
                let v = self.eval(rhs, env)?;
                env.push((name, v));
                self.enumerate(vars, rest, env, base, f)
            }
            _ => {
                if self.pred(c, env)? {
                    self.enumerate(vars, rest, env, base, f)
                } else {
                    Ok(true)
                }
            }
        };
        env.truncate(start);
        res
    }

    fn match_pattern(&self, pat: &'a Expr, v: &Value, vars: &'a [String], env: &mut Env<'a>, base: usize) -> R<bool> {
        match &pat.kind {
            ExprKind::Ident(n) if Self::is_free(vars, env, base, n) => {
                let name: &'a str = vars.iter().find(|q| *q == n).expect("binder variable");
                env.push((name, RVal::V(v.clone())));
                Ok(true)
            }
            ExprKind::Ident(_) => Ok(self.val(pat, env)? == *v),
            ExprKind::Pair(l, r) => match v.as_pair() {
                Some((a, b)) => Ok(self.match_pattern(l, a, vars, env, base)? && self.match_pattern(r, b, vars, env, base)?),
                None => Ok(false),
            },
            _ => Ok(false),
        }
    }

    fn member(&self, x: &Value, set: &RVal<'a>, loc: Loc) -> R<bool> {
        match set {
            RVal::V(Value::Set(s)) => Ok(s.binary_search(x).is_ok()),
            RVal::V(_) => Err(wd(loc, "membership in a non-set")),
            RVal::Builtin(b) => Ok(match (b, x) {
                (BuiltinSet::Integer, Value::Int(_)) => true,
                (BuiltinSet::Natural, Value::Int(i)) => !i.is_negative(),
                (BuiltinSet::Natural1, Value::Int(i)) => !i.is_negative() && !i.is_zero(),
                (BuiltinSet::Bool, Value::Bool(_)) => true,
                _ => false,
            }),
            RVal::Lambda { .. } => match x.as_pair() {
                Some((a, b)) => Ok(self.call(set, a, loc)?.as_ref() == Some(b)),
                None => Ok(false),
            },
            RVal::Arrow(op, dom, ran) => {
                let Some(elems) = x.as_set() else {
                    return Ok(false);
                };
                let mut lefts = Vec::new();
                for p in elems {
                    let Some((a, b)) = p.as_pair() else {
                        return Ok(false);
                    };
                    if !self.member(a, dom, loc)? || !self.member(b, ran, loc)? {
                        return Ok(false);
                    }
                    lefts.push(a.clone());
                }
                if *op == BinOp::Rel {
                    return Ok(true);
                }
                let n = lefts.len();
                lefts.dedup();
                if lefts.len() != n {
                    return Ok(false);
                }
                if *op == BinOp::TFun {
                    match &**dom {
                        RVal::V(Value::Set(d)) => return Ok(d.len() == n),
                        _ => return Err(cap(loc, "total function over an infinite domain")),
                    }
                }
                Ok(true)
            }
        }
    }

    fn pred(&self, p: &'a Pred, env: &mut Env<'a>) -> R<bool> {
        let loc = p.loc;
        match &p.kind {
            PredKind::Cmp(op, l, r) => match op {
                CmpOp::Member | CmpOp::NotMember => {
                    let x = self.val(l, env)?;
                    let s = self.eval(r, env)?;
                    Ok(self.member(&x, &s, loc)? == (*op == CmpOp::Member))
                }
                CmpOp::Subset | CmpOp::NotSubset => {
                    let xs = self.set(l, env)?;
                    let s = self.eval(r, env)?;
                    let mut all = true;
                    for x in xs.iter() {
                        if !self.member(x, &s, loc)? {
                            all = false;
                            break;
                        }
                    }
                    Ok(all == (*op == CmpOp::Subset))
                }
                CmpOp::Eq | CmpOp::Neq => {
                    let (a, b) = (self.val(l, env)?, self.val(r, env)?);
                    Ok((a == b) == (*op == CmpOp::Eq))
                }
                _ => {
                    let (a, b) = (self.int(l, env)?, self.int(r, env)?);
                    Ok(match op {
                        CmpOp::Lt => a < b,
                        CmpOp::Le => a <= b,
                        CmpOp::Gt => a > b,
                        _ => a >= b,
                    })
                }
            },
            PredKind::And(a, b) => Ok(self.pred(a, env)? && self.pred(b, env)?),
            PredKind::Or(a, b) => Ok(self.pred(a, env)? || self.pred(b, env)?),
            PredKind::Implies(a, b) => Ok(!self.pred(a, env)? || self.pred(b, env)?),
            PredKind::Equiv(a, b) => {
                let x = self.pred(a, env)?;
                Ok(x == self.pred(b, env)?)
            }
            PredKind::Not(a) => Ok(!self.pred(a, env)?),
            PredKind::ForAll(vars, body) => {
                let PredKind::Implies(d, q) = &body.kind else {
                    unreachable!("universal body is an implication")
                };
                let conj = d.conjuncts();
                let base = env.len();
                self.enumerate(vars, &conj, env, base, &mut |env| self.pred(q, env))
            }
            PredKind::Exists(vars, body) => {
                let conj = body.conjuncts();
                let base = env.len();
                let exhausted = self.enumerate(vars, &conj, env, base, &mut |_| Ok(false))?;
                Ok(!exhausted)
            }
        }
    }
}
