//! Predicate and expression evaluation.
//!
//! [`Engine`] is the lazy main evaluator; [`RefEngine`] is an independent
//! eager evaluator used to cross-check verdicts. They share only the AST and
//! [`Value`](crate::value::Value).

mod closure;
mod lazy;
mod main_engine;
mod reference;
mod trace;

#[cfg(test)]
mod tests;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::spec_lang::Loc;

pub use closure::{closure1_dense, iterate_relation};
pub use main_engine::{Engine, EngineOptions, Val};
pub use reference::{RefEngine, RefError};
pub use trace::{check_trace, PredTrace, Witness, WitnessKind};

/// Three-valued verdict of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Truth {
    #[serde(rename = "TRUE")]
    True,
    #[serde(rename = "FALSE")]
    False,
    #[serde(rename = "WD-ERROR")]
    WdError,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "TRUE",
            Truth::False => "FALSE",
            Truth::WdError => "WD-ERROR",
        })
    }
}

/// Failure of the main engine. Both kinds yield a WD-ERROR verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("well-definedness error at {loc}: {message}")]
    Wd { loc: Loc, message: String },
    #[error("capacity exceeded at {loc}: {message}")]
    Capacity { loc: Loc, message: String },
}

impl EvalError {
    pub fn wd(loc: Loc, message: impl Into<String>) -> Self {
        EvalError::Wd {
            loc,
            message: message.into(),
        }
    }

    pub fn capacity(loc: Loc, message: impl Into<String>) -> Self {
        EvalError::Capacity {
            loc,
            message: message.into(),
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            EvalError::Wd { loc, .. } | EvalError::Capacity { loc, .. } => *loc,
        }
    }
}

/// Instrumentation of the main engine.
#[derive(Debug, Default)]
pub struct Counters {
    /// Relation elements produced while exploring closures and images.
    pub elements_enumerated: AtomicU64,
    /// Lazy sets converted to finite sets.
    pub sets_forced: AtomicU64,
    /// Largest set produced by forcing.
    pub peak_cardinality: AtomicU64,
    /// Definition bodies evaluated.
    pub definitions_evaluated: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CounterSnapshot {
    pub elements_enumerated: u64,
    pub sets_forced: u64,
    pub peak_cardinality: u64,
    pub definitions_evaluated: u64,
}

impl Counters {
    pub(crate) fn enumerated(&self, n: usize) {
        self.elements_enumerated.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub(crate) fn forced(&self, card: usize) {
        self.sets_forced.fetch_add(1, Ordering::Relaxed);
        self.peak_cardinality.fetch_max(card as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            elements_enumerated: self.elements_enumerated.load(Ordering::Relaxed),
            sets_forced: self.sets_forced.load(Ordering::Relaxed),
            peak_cardinality: self.peak_cardinality.load(Ordering::Relaxed),
            definitions_evaluated: self.definitions_evaluated.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.elements_enumerated.store(0, Ordering::Relaxed);
        self.sets_forced.store(0, Ordering::Relaxed);
        self.peak_cardinality.store(0, Ordering::Relaxed);
        self.definitions_evaluated.store(0, Ordering::Relaxed);
    }
}

/// Outcome of comparing the two engines on one property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossStatus {
    Agree,
    Disagree,
    ReferenceIncomplete,
    /// The reference engine was not run.
    MainOnly,
}

impl fmt::Display for CrossStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossStatus::Agree => "agree",
            CrossStatus::Disagree => "DISAGREE",
            CrossStatus::ReferenceIncomplete => "reference-incomplete",
            CrossStatus::MainOnly => "main-only",
        })
    }
}

/// Verdicts of both engines for one property.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub property: String,
    pub main: Truth,
    /// `None` when the reference engine was not run.
    pub reference: Option<Result<Truth, RefError>>,
    pub status: CrossStatus,
    pub trace: PredTrace,
    /// Trace of the reference engine's verdict is not recorded; its error
    /// message is, when it failed.
    pub main_time: Duration,
    pub reference_time: Option<Duration>,
}

impl Verdict {
    pub fn agree(&self) -> bool {
        self.status == CrossStatus::Agree
    }
}

/// Compares a main-engine verdict with a reference outcome.
pub fn compare(main: Truth, reference: &Option<Result<Truth, RefError>>) -> CrossStatus {
    match reference {
        None => CrossStatus::MainOnly,
        Some(Err(RefError::Capacity { .. })) => CrossStatus::ReferenceIncomplete,
        Some(Err(RefError::Wd { .. })) if main == Truth::WdError => CrossStatus::Agree,
        Some(Err(RefError::Wd { .. })) => CrossStatus::Disagree,
        Some(Ok(r)) if *r == main => CrossStatus::Agree,
        Some(Ok(_)) => CrossStatus::Disagree,
    }
}

/// Evaluates a property with both engines and compares the verdicts.
pub fn cross_check<'a>(main: &Engine<'a>, reference: Option<&RefEngine<'a>>, property: &str) -> Option<Verdict> {
    let p = main.model().property(property)?;
    let start = std::time::Instant::now();
    let trace = main.trace_pred(&p.pred);
    let main_time = start.elapsed();
    let (reference_result, reference_time) = match reference {
        Some(r) => {
            let start = std::time::Instant::now();
            let res = r.holds(&p.pred);
            (Some(res), Some(start.elapsed()))
        }
        None => (None, None),
    };
    let status = compare(trace.verdict, &reference_result);
    Some(Verdict {
        property: property.to_string(),
        main: trace.verdict,
        reference: reference_result,
        status,
        trace,
        main_time,
        reference_time,
    })
}
