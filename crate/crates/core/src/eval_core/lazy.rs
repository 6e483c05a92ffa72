//! Symbolic set representations of the main engine.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::AtomicUsize;
use std::sync::{Arc, Mutex, OnceLock};

use crate::spec_lang::{BinOp, BuiltinSet, Expr, Pred};
use crate::value::{Int, Value};

use super::closure::ReachIndex;
use super::main_engine::{Env, Val};
use super::EvalError;

pub struct LazySet<'a> {
    pub kind: Lazy<'a>,
    pub forced: OnceLock<Result<Value, EvalError>>,
}

impl<'a> LazySet<'a> {
    pub fn new(kind: Lazy<'a>) -> Arc<Self> {
        Arc::new(LazySet {
            kind,
            forced: OnceLock::new(),
        })
    }
}

pub enum Lazy<'a> {
    Interval(Int, Int),
    Builtin(BuiltinSet),
    Cart(Val<'a>, Val<'a>),
    PProd(Val<'a>, Val<'a>),
    Closure1(ClosureSet<'a>),
    Iterate(Val<'a>, u64),
    Lambda(Binder<'a>),
    Comp(Binder<'a>),
    Arrow(BinOp, Val<'a>, Val<'a>),
    Union(Val<'a>, Val<'a>),
    Inter(Val<'a>, Val<'a>),
    Diff(Val<'a>, Val<'a>),
}

impl Lazy<'_> {
    pub fn describe(&self) -> &'static str {
        match self {
            Lazy::Interval(..) => "interval",
            Lazy::Builtin(_) => "built-in set",
            Lazy::Cart(..) => "cartesian product",
            Lazy::PProd(..) => "parallel product",
            Lazy::Closure1(_) => "closure1",
            Lazy::Iterate(..) => "iterate",
            Lazy::Lambda(_) => "lambda",
            Lazy::Comp(_) => "comprehension",
            Lazy::Arrow(..) => "relation set",
            Lazy::Union(..) => "union",
            Lazy::Inter(..) => "intersection",
            Lazy::Diff(..) => "difference",
        }
    }
}

/// A lambda or comprehension together with the local bindings it captured.
pub struct Binder<'a> {
    pub vars: &'a [String],
    pub constraint: &'a Pred,
    /// Lambda body, or comprehension output expression.
    pub body: Option<&'a Expr>,
    pub captured: Env<'a>,
}

/// Reachability state from one source node.
pub struct Bfs {
    pub visited: HashSet<Value>,
    pub queue: VecDeque<Value>,
}

impl Bfs {
    pub fn new(src: &Value) -> Bfs {
        Bfs {
            visited: HashSet::new(),
            queue: VecDeque::from([src.clone()]),
        }
    }

    pub fn done(&self) -> bool {
        self.queue.is_empty()
    }
}

const BFS_CACHE: usize = 8;

/// `closure1(rel)` with resumable per-source searches. A few recent
/// searches are kept so repeated queries from one source share work.
pub struct ClosureSet<'a> {
    pub rel: Val<'a>,
    cache: Mutex<VecDeque<(Value, Bfs)>>,
    /// Membership queries answered so far.
    pub queries: AtomicUsize,
    /// Built once queries are frequent; `None` when `rel` cannot be forced.
    pub index: OnceLock<Option<ReachIndex>>,
}

impl<'a> ClosureSet<'a> {
    pub fn new(rel: Val<'a>) -> Self {
        ClosureSet {
            rel,
            cache: Mutex::new(VecDeque::new()),
            queries: AtomicUsize::new(0),
            index: OnceLock::new(),
        }
    }

    /// Removes the cached search for `src`, or starts a new one.
    pub fn take(&self, src: &Value) -> Bfs {
        let mut cache = self.cache.lock().expect("closure cache");
        match cache.iter().position(|(s, _)| s == src) {
            Some(i) => cache.remove(i).expect("index in range").1,
            None => Bfs::new(src),
        }
    }

    pub fn put(&self, src: Value, bfs: Bfs) {
        let mut cache = self.cache.lock().expect("closure cache");
        cache.push_front((src, bfs));
        cache.truncate(BFS_CACHE);
    }
}
