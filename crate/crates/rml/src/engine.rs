//! Incremental monitoring by term derivatives.
//!
//! A monitor holds a set of [`Alternative`]s, each a residual term with the
//! bindings collected along its lineage. Consuming an event replaces every
//! alternative by its derivatives; the property is violated once no
//! alternative survives.
//!
//! Variables introduced by `let` are resolved by substitution: as soon as an
//! event binds one of them, its value is written into the residual term and
//! the variable leaves the scope. Each unfolding of a recursive equation thus
//! gets fresh variables, and a value, once substituted, never changes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::MonitorError;
use crate::pattern::{match_pattern, Arg, Bindings};
use crate::term::{Spec, Term, TermRef};
use crate::value::{Event, Value};

/// Default cap on live alternatives per monitor.
pub const DEFAULT_ALTERNATIVE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alternative {
    pub term: TermRef,
    pub bindings: Bindings,
}

impl Alternative {
    pub fn new(term: TermRef) -> Self {
        Alternative {
            term,
            bindings: Bindings::new(),
        }
    }
}

/// Counters for conditions that silently drop an alternative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Negated event types reached while some argument was still unbound.
    pub unbound_negations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_false(self) -> bool {
        self == Verdict::False
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict plus whether the trace seen so far is itself a complete trace of
/// the property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepOutcome {
    pub verdict: Verdict,
    pub currently_accepting: bool,
}

// ---- simplification ----

fn mk_seq(a: TermRef, b: TermRef) -> TermRef {
    match (&*a, &*b) {
        (Term::Fail, _) | (_, Term::Fail) => Term::fail(),
        (Term::Epsilon, _) => b,
        (_, Term::Epsilon) => a,
        _ => Term::seq(a, b),
    }
}

fn mk_shuffle(a: TermRef, b: TermRef) -> TermRef {
    match (&*a, &*b) {
        (Term::Fail, _) | (_, Term::Fail) => Term::fail(),
        (Term::Epsilon, _) => b,
        (_, Term::Epsilon) => a,
        _ => Term::shuffle(a, b),
    }
}

fn mk_and(a: TermRef, b: TermRef, spec: &Spec) -> TermRef {
    match (&*a, &*b) {
        (Term::Fail, _) | (_, Term::Fail) => Term::fail(),
        (Term::Epsilon, _) => {
            if spec.nullable(&b) {
                a
            } else {
                Term::fail()
            }
        }
        (_, Term::Epsilon) => {
            if spec.nullable(&a) {
                b
            } else {
                Term::fail()
            }
        }
        _ => Term::and(a, b),
    }
}

fn mk_or(a: TermRef, b: TermRef) -> TermRef {
    match (&*a, &*b) {
        (Term::Fail, _) => b,
        (_, Term::Fail) => a,
        _ if a == b => a,
        _ => Term::or(a, b),
    }
}

fn mk_star(a: TermRef) -> TermRef {
    match &*a {
        Term::Fail | Term::Epsilon => Term::epsilon(),
        Term::Star(_) => a,
        _ => Term::star(a),
    }
}

fn mk_let(vars: Vec<String>, body: TermRef) -> TermRef {
    let live: Vec<String> = vars.into_iter().filter(|v| body.has_free(v)).collect();
    if live.is_empty() {
        body
    } else {
        Term::let_in(live, body)
    }
}

/// Rewrites `term` bottom-up with the unit and absorption laws of the
/// operators. The result denotes the same set of traces.
pub fn simplify(term: &TermRef, spec: &Spec) -> TermRef {
    match &**term {
        Term::Seq(a, b) => mk_seq(simplify(a, spec), simplify(b, spec)),
        Term::Shuffle(a, b) => mk_shuffle(simplify(a, spec), simplify(b, spec)),
        Term::And(a, b) => mk_and(simplify(a, spec), simplify(b, spec), spec),
        Term::Or(a, b) => mk_or(simplify(a, spec), simplify(b, spec)),
        Term::Star(a) => mk_star(simplify(a, spec)),
        Term::Let(vars, body) => mk_let(vars.clone(), simplify(body, spec)),
        Term::Event { .. } | Term::Eq(_) | Term::Epsilon | Term::Fail => term.clone(),
    }
}

// ---- derivatives ----

fn resolve_args(args: &[Arg], bindings: &Bindings) -> Vec<Arg> {
    args.iter()
        .map(|a| match a {
            Arg::Var(v) => bindings
                .get(v)
                .map(|val| Arg::Value(val.clone()))
                .unwrap_or_else(|| a.clone()),
            Arg::Value(_) => a.clone(),
        })
        .collect()
}

struct Deriver<'a> {
    spec: &'a Spec,
    event: &'a Value,
    diagnostics: &'a mut Diagnostics,
}

impl Deriver<'_> {
    fn derive(&mut self, term: &TermRef, bindings: &Bindings) -> Vec<(TermRef, Bindings)> {
        match &**term {
            Term::Epsilon | Term::Fail => Vec::new(),
            Term::Event {
                name,
                args,
                negated,
            } => {
                let Some(decl) = self.spec.event_type(name) else {
                    return Vec::new();
                };
                let args = resolve_args(args, bindings);
                if *negated {
                    if args.iter().any(|a| matches!(a, Arg::Var(_))) {
                        self.diagnostics.unbound_negations += 1;
                        return Vec::new();
                    }
                    let positive = decl
                        .instantiate(&args)
                        .ok()
                        .and_then(|p| match_pattern(&p, self.event, bindings));
                    match positive {
                        Some(_) => Vec::new(),
                        None => vec![(Term::epsilon(), bindings.clone())],
                    }
                } else {
                    decl.instantiate(&args)
                        .ok()
                        .and_then(|p| match_pattern(&p, self.event, bindings))
                        .map(|b| vec![(Term::epsilon(), b)])
                        .unwrap_or_default()
                }
            }
            Term::Seq(a, b) => {
                let mut out: Vec<_> = self
                    .derive(a, bindings)
                    .into_iter()
                    .map(|(r, bs)| (mk_seq(r, b.clone()), bs))
                    .collect();
                if self.spec.nullable(a) {
                    out.extend(self.derive(b, bindings));
                }
                out
            }
            Term::Shuffle(a, b) => {
                let mut out: Vec<_> = self
                    .derive(a, bindings)
                    .into_iter()
                    .map(|(r, bs)| (mk_shuffle(r, b.clone()), bs))
                    .collect();
                out.extend(
                    self.derive(b, bindings)
                        .into_iter()
                        .map(|(r, bs)| (mk_shuffle(a.clone(), r), bs)),
                );
                out
            }
            Term::And(a, b) => {
                let left = self.derive(a, bindings);
                if left.is_empty() {
                    return left;
                }
                let right = self.derive(b, bindings);
                let mut out = Vec::new();
                for (ra, ba) in &left {
                    for (rb, bb) in &right {
                        let Some(both) = ba.unify(bb) else { continue };
                        let t = mk_and(ra.clone(), rb.clone(), self.spec);
                        if !matches!(*t, Term::Fail) {
                            out.push((t, both));
                        }
                    }
                }
                dedup(out)
            }
            Term::Or(a, b) => {
                let mut out = self.derive(a, bindings);
                out.extend(self.derive(b, bindings));
                dedup(out)
            }
            Term::Star(a) => self
                .derive(a, bindings)
                .into_iter()
                .map(|(r, bs)| (mk_seq(r, term.clone()), bs))
                .collect(),
            Term::Eq(name) => match self.spec.equation(name) {
                Some(body) => self.derive(&body.clone(), bindings),
                None => Vec::new(),
            },
            Term::Let(vars, body) => {
                let mut inner = bindings.clone();
                for v in vars {
                    inner.remove(v);
                }
                self.derive(body, &inner)
                    .into_iter()
                    .map(|(r, mut b)| {
                        let mut fresh = Bindings::new();
                        let mut pending = Vec::new();
                        for v in vars {
                            match b.remove(v) {
                                Some(val) => fresh.insert(v.clone(), val),
                                None => pending.push(v.clone()),
                            }
                            if let Some(outer) = bindings.get(v) {
                                b.insert(v.clone(), outer.clone());
                            }
                        }
                        (mk_let(pending, r.substitute(&fresh)), b)
                    })
                    .collect()
            }
        }
    }
}

// Conjunctions multiply alternatives, so duplicates are dropped as early as
// possible rather than only at the monitor level.
fn dedup(items: Vec<(TermRef, Bindings)>) -> Vec<(TermRef, Bindings)> {
    if items.len() < 2 {
        return items;
    }
    let mut seen = BTreeSet::new();
    items
        .into_iter()
        .filter(|i| seen.insert(i.clone()))
        .collect()
}

/// All derivatives of `alt` by `event`, simplified. May be empty.
pub fn derive(alt: &Alternative, event: &Event, spec: &Spec) -> Vec<Alternative> {
    let mut diagnostics = Diagnostics::default();
    derive_with(alt, &event.to_value(), spec, &mut diagnostics)
}

fn derive_with(
    alt: &Alternative,
    event: &Value,
    spec: &Spec,
    diagnostics: &mut Diagnostics,
) -> Vec<Alternative> {
    let mut d = Deriver {
        spec,
        event,
        diagnostics,
    };
    d.derive(&alt.term, &alt.bindings)
        .into_iter()
        .filter(|(t, _)| !matches!(**t, Term::Fail))
        .map(|(term, bindings)| Alternative { term, bindings })
        .collect()
}

// ---- monitor ----

/// Incremental monitor state for one property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorState {
    spec: Arc<Spec>,
    alternatives: Vec<Alternative>,
    events_seen: u64,
    cap: usize,
    diagnostics: Diagnostics,
}

impl MonitorState {
    pub fn new(spec: impl Into<Arc<Spec>>) -> Self {
        Self::with_cap(spec, DEFAULT_ALTERNATIVE_CAP)
    }

    pub fn with_cap(spec: impl Into<Arc<Spec>>, cap: usize) -> Self {
        let spec = spec.into();
        let start = Alternative::new(spec.main_term());
        MonitorState {
            spec,
            alternatives: vec![start],
            events_seen: 0,
            cap,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn spec(&self) -> &Arc<Spec> {
        &self.spec
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn events_seen(&self) -> u64 {
        self.events_seen
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.diagnostics
    }

    pub fn is_violated(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn outcome(&self) -> StepOutcome {
        let currently_accepting = self
            .alternatives
            .iter()
            .any(|a| self.spec.nullable(&a.term));
        let verdict = if self.alternatives.is_empty() {
            Verdict::False
        } else if self
            .alternatives
            .iter()
            .all(|a| matches!(*a.term, Term::Epsilon))
        {
            Verdict::True
        } else {
            Verdict::Inconclusive
        };
        StepOutcome {
            verdict,
            currently_accepting,
        }
    }

    /// Consumes one event, returning the successor state and its verdict.
    pub fn step(&self, event: &Event) -> Result<(MonitorState, StepOutcome), MonitorError> {
        let mut next = self.clone();
        let outcome = next.advance(event)?;
        Ok((next, outcome))
    }

    /// In-place variant of [`MonitorState::step`]. On overload the state is
    /// left untouched.
    pub fn advance(&mut self, event: &Event) -> Result<StepOutcome, MonitorError> {
        if !self.alternatives.is_empty() {
            let value = event.to_value();
            let mut diagnostics = self.diagnostics;
            let mut seen = BTreeSet::new();
            let mut next = Vec::new();
            for alt in &self.alternatives {
                for d in derive_with(alt, &value, &self.spec, &mut diagnostics) {
                    if seen.insert(d.clone()) {
                        next.push(d);
                    }
                }
                if next.len() > self.cap {
                    return Err(MonitorError::Overload {
                        alternatives: next.len(),
                        cap: self.cap,
                    });
                }
            }
            self.alternatives = next;
            self.diagnostics = diagnostics;
        }
        self.events_seen += 1;
        Ok(self.outcome())
    }

    /// Event-type uses that could consume the next event, for explanations.
    pub fn expected(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for alt in &self.alternatives {
            first_events(&alt.term, &self.spec, &mut BTreeSet::new(), &mut out);
        }
        out.into_iter().collect()
    }
}

fn first_events(
    term: &Term,
    spec: &Spec,
    visiting: &mut BTreeSet<String>,
    out: &mut BTreeSet<String>,
) {
    match term {
        Term::Event { .. } => {
            out.insert(term.to_string());
        }
        Term::Seq(a, b) => {
            first_events(a, spec, visiting, out);
            if spec.nullable(a) {
                first_events(b, spec, visiting, out);
            }
        }
        Term::Shuffle(a, b) | Term::And(a, b) | Term::Or(a, b) => {
            first_events(a, spec, visiting, out);
            first_events(b, spec, visiting, out);
        }
        Term::Star(a) | Term::Let(_, a) => first_events(a, spec, visiting, out),
        Term::Eq(name) => {
            if visiting.insert(name.clone()) {
                if let Some(body) = spec.equation(name) {
                    first_events(body, spec, visiting, out);
                }
            }
        }
        Term::Epsilon | Term::Fail => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{event, parse};

    fn spec(src: &str) -> Arc<Spec> {
        Arc::new(parse(src).unwrap())
    }

    const AB: &str = r#"
        type ET1 matches { k: "a" };
        type ET2 matches { k: "b" };
    "#;

    fn a() -> Event {
        event! { "k" => "a" }
    }
    fn b() -> Event {
        event! { "k" => "b" }
    }
    fn ab() -> Event {
        event! { "k" => "a", "k2" => "b" }
    }

    #[test]
    fn or_on_event_matching_both_merges_identical_epsilons() {
        let s =
            spec(r#"type ET1 matches { k: "a" }; type ET2 matches { k2: "b" }; M = ET1 \/ ET2;"#);
        let alt = Alternative::new(s.equation("M").unwrap().clone());
        let ds = derive(&alt, &ab(), &s);
        assert_eq!(ds.len(), 1);
        assert_eq!(*ds[0].term, Term::Epsilon);
    }

    #[test]
    fn shuffle_consumes_either_side() {
        let s = spec(&format!("{AB} M = ET1 | ET2;"));
        let alt = Alternative::new(s.equation("M").unwrap().clone());
        let ds = derive(&alt, &a(), &s);
        assert_eq!(ds.len(), 1);
        assert_eq!(
            *ds[0].term,
            Term::Event {
                name: "ET2".into(),
                args: vec![],
                negated: false
            }
        );
    }

    #[test]
    fn simplify_examples() {
        let s = spec(&format!("{AB} M = ET1;"));
        let et1 = Term::event("ET1", vec![]);
        assert_eq!(simplify(&Term::seq(Term::epsilon(), et1.clone()), &s), et1);
        let star = Term::star(et1.clone());
        assert_eq!(simplify(&Term::or(Term::fail(), star.clone()), &s), star);
        assert_eq!(
            simplify(&Term::and(Term::epsilon(), star.clone()), &s),
            Term::epsilon()
        );
        assert_eq!(
            simplify(&Term::and(Term::epsilon(), et1.clone()), &s),
            Term::fail()
        );
        assert_eq!(simplify(&Term::star(Term::fail()), &s), Term::epsilon());
        assert_eq!(
            simplify(&Term::shuffle(et1.clone(), Term::epsilon()), &s),
            et1
        );
        let unused = Term::let_in(vec!["x".into()], et1.clone());
        assert_eq!(simplify(&unused, &s), et1);
    }

    #[test]
    fn singleton_trace_verdicts() {
        let s = spec(&format!("{AB} M = ET1;"));
        let m = MonitorState::new(s);
        assert_eq!(m.outcome().verdict, Verdict::Inconclusive);
        let (m, o) = m.step(&a()).unwrap();
        assert_eq!(
            o,
            StepOutcome {
                verdict: Verdict::True,
                currently_accepting: true
            }
        );
        let (m, o) = m.step(&a()).unwrap();
        assert_eq!(o.verdict, Verdict::False);
        let (_, o) = m.step(&b()).unwrap();
        assert_eq!(o.verdict, Verdict::False);
    }

    #[test]
    fn recursion_stays_inconclusive() {
        let s = spec(&format!("{AB} M = ET1 M \\/ ET2;"));
        let mut m = MonitorState::new(s);
        for _ in 0..5 {
            assert_eq!(m.advance(&a()).unwrap().verdict, Verdict::Inconclusive);
        }
        assert_eq!(m.advance(&b()).unwrap().verdict, Verdict::True);
    }

    #[test]
    fn let_binds_once_per_scope() {
        let s = spec("type t(x) matches { v: x }; M = let x { t(x) t(x) };");
        let mut m = MonitorState::new(s.clone());
        m.advance(&event! { "v" => 1 }).unwrap();
        assert_eq!(m.alternatives().len(), 1);
        assert_eq!(m.alternatives()[0].term.to_string(), "t(1)");
        assert_eq!(
            m.advance(&event! { "v" => 2 }).unwrap().verdict,
            Verdict::False
        );
        let mut m = MonitorState::new(s);
        m.advance(&event! { "v" => 1 }).unwrap();
        assert_eq!(
            m.advance(&event! { "v" => 1 }).unwrap().verdict,
            Verdict::True
        );
    }

    #[test]
    fn let_inside_star_is_fresh_per_iteration() {
        let s = spec("type t(x) matches { v: x }; M = (let x { t(x) t(x) })*;");
        let mut m = MonitorState::new(s);
        for v in [1, 1, 2, 2, 7, 7] {
            assert_ne!(
                m.advance(&event! { "v" => v }).unwrap().verdict,
                Verdict::False
            );
        }
        assert!(m.outcome().currently_accepting);
        m.advance(&event! { "v" => 3 }).unwrap();
        assert_eq!(
            m.advance(&event! { "v" => 4 }).unwrap().verdict,
            Verdict::False
        );
    }

    #[test]
    fn unbound_negation_dropped_with_diagnostic() {
        let s = spec("type t(x) matches { v: x }; M = let x { !t(x) };");
        let mut m = MonitorState::new(s);
        assert_eq!(
            m.advance(&event! { "v" => 1 }).unwrap().verdict,
            Verdict::False
        );
        assert_eq!(m.diagnostics().unbound_negations, 1);
    }

    #[test]
    fn overload_is_reported() {
        // alternatives multiply with the number of ways to split the prefix
        let s = spec("type any matches {}; M = (any \\/ any any)* (any any any)*;");
        let mut m = MonitorState::with_cap(s, 2);
        let mut overloaded = false;
        for _ in 0..8 {
            if let Err(MonitorError::Overload { cap: 2, .. }) = m.advance(&event! { "v" => 1 }) {
                overloaded = true;
                break;
            }
        }
        assert!(overloaded);
    }

    #[test]
    fn expected_lists_frontier() {
        let s = spec(&format!("{AB} M = ET1 ET2 \\/ ET2;"));
        let m = MonitorState::new(s);
        assert_eq!(m.expected(), vec!["ET1".to_string(), "ET2".to_string()]);
    }
}
