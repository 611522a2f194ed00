//! Bounded trace semantics of POWL models, computed directly on the tree.
//!
//! This is the reference the Petri-net conversion is checked against, so it
//! deliberately shares no code with [`crate::conversion`].
//!
//! * activity `a` produces `⟨a⟩`, a silent node produces `⟨⟩`;
//! * xor is the union of its children;
//! * `loop(do, redo)` is `do · (redo · do)^k` for `k ≤ max_loop`;
//! * a partial order interleaves one trace per node such that every event of
//!   `i` precedes every event of `j` whenever `i` precedes `j` in the closure.
//!
//! Traces longer than `max_len` are dropped. Since every operator only ever
//! makes traces longer, they are dropped as early as possible.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::powl::{transitive_closure, validate, Node, PowlModel, Violation};

pub const DEFAULT_TRACE_CAP: usize = 100_000;

/// Visible activity labels in execution order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Trace(pub Vec<String>);

impl Trace {
    pub fn new<S: Into<String>>(events: impl IntoIterator<Item = S>) -> Self {
        Trace(events.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn events(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}⟩", self.0.join(", "))
    }
}

pub type Language = BTreeSet<Trace>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("model is invalid: {0:?}")]
    ValidationFailed(Vec<Violation>),
    #[error("trace enumeration exceeded the cap of {cap} traces")]
    ExplosionGuard { cap: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub max_loop: usize,
    pub max_len: usize,
    /// Largest intermediate trace set before giving up.
    pub cap: usize,
}

impl Bounds {
    pub fn new(max_loop: usize, max_len: usize) -> Self {
        Bounds {
            max_loop,
            max_len,
            cap: DEFAULT_TRACE_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }
}

/// Completed traces of `model` with at most `max_loop` redo rounds per loop
/// entry and at most `max_len` events.
pub fn bounded_language(
    model: &PowlModel,
    max_loop: usize,
    max_len: usize,
) -> Result<Language, SemanticsError> {
    bounded_language_with(model, Bounds::new(max_loop, max_len))
}

pub fn bounded_language_with(model: &PowlModel, bounds: Bounds) -> Result<Language, SemanticsError> {
    let violations = validate(model);
    if !violations.is_empty() {
        return Err(SemanticsError::ValidationFailed(violations));
    }
    language(model, &bounds)
}

/// Same as [`bounded_language_with`] but skips validation. Shared submodels
/// are harmless here because the tree is walked per occurrence; the
/// orchestrator uses this to compare a model before and after repair.
pub(crate) fn bounded_language_unchecked(
    model: &PowlModel,
    bounds: Bounds,
) -> Result<Language, SemanticsError> {
    language(model, &bounds)
}

/// `true` iff `trace` is in the language bounded by `max_loop` and the
/// trace's own length.
pub fn contains_trace(
    model: &PowlModel,
    trace: &Trace,
    max_loop: usize,
) -> Result<bool, SemanticsError> {
    Ok(bounded_language(model, max_loop, trace.len())?.contains(trace))
}

fn guard(set: &Language, cap: usize) -> Result<(), SemanticsError> {
    if set.len() > cap {
        Err(SemanticsError::ExplosionGuard { cap })
    } else {
        Ok(())
    }
}

fn concat(a: &Trace, b: &Trace) -> Trace {
    let mut events = a.0.clone();
    events.extend(b.0.iter().cloned());
    Trace(events)
}

fn language(model: &PowlModel, b: &Bounds) -> Result<Language, SemanticsError> {
    let out = match model.node() {
        Node::Activity { label } => {
            let mut set = Language::new();
            if b.max_len >= 1 {
                set.insert(Trace(vec![label.clone()]));
            }
            set
        }
        Node::Silent => Language::from([Trace::empty()]),
        Node::Xor { children } => {
            let mut set = Language::new();
            for child in children {
                set.extend(language(child, b)?);
                guard(&set, b.cap)?;
            }
            set
        }
        Node::Loop { body, redo } => {
            let body = language(body, b)?;
            let redo = language(redo, b)?;
            let mut set = body.clone();
            let mut frontier = body.clone();
            for _ in 0..b.max_loop {
                let mut next = Language::new();
                for f in &frontier {
                    for r in &redo {
                        if f.len() + r.len() > b.max_len {
                            continue;
                        }
                        let fr = concat(f, r);
                        for d in &body {
                            if fr.len() + d.len() <= b.max_len {
                                next.insert(concat(&fr, d));
                            }
                        }
                        guard(&next, b.cap)?;
                    }
                }
                if next.is_empty() {
                    break;
                }
                set.extend(next.iter().cloned());
                guard(&set, b.cap)?;
                frontier = next;
            }
            set
        }
        Node::PartialOrder(po) => {
            let closure = transitive_closure(po.edges(), po.nodes().len());
            let langs: Vec<Vec<Trace>> = po
                .nodes()
                .iter()
                .map(|n| language(n, b).map(|l| l.into_iter().collect()))
                .collect::<Result<_, _>>()?;
            let mut set = Language::new();
            let mut pick = Vec::with_capacity(langs.len());
            combine(&langs, 0, 0, &mut pick, &closure, b, &mut set)?;
            set
        }
    };
    guard(&out, b.cap)?;
    Ok(out)
}

/// Chooses one trace per node (depth first), pruning on total length, and
/// shuffles each complete choice into `out`.
fn combine<'a>(
    langs: &'a [Vec<Trace>],
    i: usize,
    used: usize,
    pick: &mut Vec<&'a Trace>,
    closure: &BTreeSet<(usize, usize)>,
    b: &Bounds,
    out: &mut Language,
) -> Result<(), SemanticsError> {
    if i == langs.len() {
        let traces: Vec<&Trace> = pick.clone();
        shuffle_into(&traces, closure, out, b.cap)?;
        return Ok(());
    }
    for t in &langs[i] {
        if used + t.len() > b.max_len {
            continue;
        }
        pick.push(t);
        combine(langs, i + 1, used + t.len(), pick, closure, b, out)?;
        pick.pop();
    }
    Ok(())
}

/// All interleavings of `traces` that keep each trace's own order and put
/// every event of trace `i` before every event of trace `j` for each `(i, j)`
/// in `closure_edges`.
pub fn order_preserving_shuffles(
    traces: &[Trace],
    closure_edges: &BTreeSet<(usize, usize)>,
) -> Language {
    let refs: Vec<&Trace> = traces.iter().collect();
    let mut out = Language::new();
    shuffle_into(&refs, closure_edges, &mut out, usize::MAX)
        .expect("uncapped shuffle cannot overflow");
    out
}

fn shuffle_into(
    traces: &[&Trace],
    closure: &BTreeSet<(usize, usize)>,
    out: &mut Language,
    cap: usize,
) -> Result<(), SemanticsError> {
    let n = traces.len();
    let mut preds = vec![Vec::new(); n];
    for &(s, t) in closure {
        if s < n && t < n && s != t {
            preds[t].push(s);
        }
    }
    let total: usize = traces.iter().map(|t| t.len()).sum();
    let mut pos = vec![0usize; n];
    let mut current = Vec::with_capacity(total);
    step(traces, &preds, &mut pos, &mut current, total, out, cap)
}

fn step(
    traces: &[&Trace],
    preds: &[Vec<usize>],
    pos: &mut [usize],
    current: &mut Vec<String>,
    total: usize,
    out: &mut Language,
    cap: usize,
) -> Result<(), SemanticsError> {
    if current.len() == total {
        out.insert(Trace(current.clone()));
        return if out.len() > cap {
            Err(SemanticsError::ExplosionGuard { cap })
        } else {
            Ok(())
        };
    }
    for i in 0..traces.len() {
        if pos[i] == traces[i].len() {
            continue;
        }
        if pos[i] == 0 && preds[i].iter().any(|&p| pos[p] < traces[p].len()) {
            continue;
        }
        current.push(traces[i].0[pos[i]].clone());
        pos[i] += 1;
        step(traces, preds, pos, current, total, out, cap)?;
        pos[i] -= 1;
        current.pop();
    }
    Ok(())
}
