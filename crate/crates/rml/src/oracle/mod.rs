//! Brute-force trace membership, straight from the denotational clauses.
//!
//! This is a test oracle for the derivative engine and deliberately shares
//! none of its machinery beyond pattern matching: sequences try every split
//! point, shuffles try every assignment of positions to the two operands,
//! and stars and equations are unfolded up to a depth bound. The cost is
//! exponential in the trace length.

pub mod gen;

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::MonitorState;
use crate::pattern::{match_pattern, Arg, Bindings};
use crate::term::{Spec, Term};
use crate::value::{Event, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unfolding depth exceeded before a witness was found")]
pub struct DepthExceeded;

struct Solutions {
    bindings: Vec<Bindings>,
    truncated: bool,
}

impl Solutions {
    fn none() -> Self {
        Solutions {
            bindings: Vec::new(),
            truncated: false,
        }
    }

    fn one(b: Bindings) -> Self {
        Solutions {
            bindings: vec![b],
            truncated: false,
        }
    }

    fn absorb(&mut self, other: Solutions) {
        self.truncated |= other.truncated;
        for b in other.bindings {
            if !self.bindings.contains(&b) {
                self.bindings.push(b);
            }
        }
    }
}

/// Whether `trace` belongs to the denotation of `term`, with stars and
/// equation references unfolded at most `depth` times along any path.
pub fn member(
    trace: &[Event],
    term: &Term,
    spec: &Spec,
    depth: usize,
) -> Result<bool, DepthExceeded> {
    let values: Vec<Value> = trace.iter().map(Event::to_value).collect();
    let refs: Vec<&Value> = values.iter().collect();
    let sols = denote(term, &refs, &Bindings::new(), spec, depth);
    if !sols.bindings.is_empty() {
        Ok(true)
    } else if sols.truncated {
        Err(DepthExceeded)
    } else {
        Ok(false)
    }
}

/// A prefix on which the monitor and the oracle disagree about viability.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("prefix of length {} : monitor viable = {monitor_viable}, oracle viable = {oracle_viable}", trace.len())]
pub struct Disagreement {
    pub trace: Vec<Event>,
    pub monitor_viable: bool,
    pub oracle_viable: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViabilityError {
    #[error(transparent)]
    Disagreement(#[from] Disagreement),
    #[error("oracle depth exceeded on a trace of length {0}")]
    Depth(usize),
    #[error("monitor error: {0}")]
    Monitor(String),
}

/// Compares the monitor against the oracle on every trace over `alphabet`
/// of length at most `max_len`.
///
/// A prefix `p` is viable for the oracle when some `p·e` with
/// `|p·e| <= max(max_len, |p| + slack)` is a member. The monitor calls it
/// viable when its verdict is not false. Returns the number of prefixes
/// checked.
pub fn check_viability(
    spec: &Spec,
    alphabet: &[Event],
    max_len: usize,
    slack: usize,
    depth: usize,
) -> Result<usize, ViabilityError> {
    let mut checker = Checker {
        spec,
        alphabet,
        depth,
        members: HashMap::new(),
    };
    let monitor = MonitorState::new(spec.clone());
    let mut trace = Vec::new();
    let mut count = 0;
    checker.walk(&monitor, &mut trace, max_len, slack, &mut count)?;
    Ok(count)
}

struct Checker<'a> {
    spec: &'a Spec,
    alphabet: &'a [Event],
    depth: usize,
    members: HashMap<Vec<usize>, bool>,
}

impl Checker<'_> {
    fn member(&mut self, idx: &[usize]) -> Result<bool, ViabilityError> {
        if let Some(&m) = self.members.get(idx) {
            return Ok(m);
        }
        let trace: Vec<Event> = idx.iter().map(|&i| self.alphabet[i].clone()).collect();
        let main = self.spec.main_term();
        let m = member(&trace, &main, self.spec, self.depth)
            .map_err(|_| ViabilityError::Depth(trace.len()))?;
        self.members.insert(idx.to_vec(), m);
        Ok(m)
    }

    fn completable(
        &mut self,
        idx: &mut Vec<usize>,
        remaining: usize,
    ) -> Result<bool, ViabilityError> {
        if self.member(idx)? {
            return Ok(true);
        }
        if remaining == 0 {
            return Ok(false);
        }
        for i in 0..self.alphabet.len() {
            idx.push(i);
            let ok = self.completable(idx, remaining - 1);
            idx.pop();
            if ok? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn walk(
        &mut self,
        monitor: &MonitorState,
        idx: &mut Vec<usize>,
        max_len: usize,
        slack: usize,
        count: &mut usize,
    ) -> Result<(), ViabilityError> {
        let horizon = max_len.max(idx.len() + slack);
        let oracle_viable = self.completable(idx, horizon - idx.len())?;
        let monitor_viable = !monitor.is_violated();
        *count += 1;
        if oracle_viable != monitor_viable {
            let trace = idx.iter().map(|&i| self.alphabet[i].clone()).collect();
            return Err(Disagreement {
                trace,
                monitor_viable,
                oracle_viable,
            }
            .into());
        }
        if idx.len() == max_len {
            return Ok(());
        }
        for i in 0..self.alphabet.len() {
            let (next, _) = monitor
                .step(&self.alphabet[i])
                .map_err(|e| ViabilityError::Monitor(e.to_string()))?;
            idx.push(i);
            let r = self.walk(&next, idx, max_len, slack, count);
            idx.pop();
            r?;
        }
        Ok(())
    }
}

/// Event types shared by every [`CORPUS`] entry.
pub const CORPUS_TYPES: &str = r#"
type A(x) matches { k: "a", v: x };
type B(x) matches { k: "b", v: x };
type a matches { k: "a" };
type b matches { k: "b" };
type one matches { v: 1 };
type low matches { v: < 2 };
"#;

/// Non-recursive equations covering every operator, for use with
/// [`corpus_alphabet`]. Every viable prefix of these terms can be completed
/// within two more events.
pub const CORPUS: &[&str] = &[
    "M = a;",
    "M = a b;",
    "M = a \\/ b b;",
    "M = a | b;",
    "M = (a | b) a;",
    "M = a*;",
    "M = (a b)*;",
    "M = (a \\/ b)* /\\ (a b)*;",
    "M = a* | b*;",
    "M = let x { A(x) B(x) };",
    "M = let x { A(x) !A(x)* };",
    "M = let x { A(x) | B(x) };",
    "M = (a \\/ b)* /\\ one*;",
    "M = (low /\\ a) b \\/ b;",
    "M = let x { A(x) (b* /\\ B(x)*) };",
    "M = N N; N = a \\/ b;",
    "M = (let x { A(x) B(x) })*;",
    "M = let x { (A(x) \\/ B(x))* };",
    "M = a* b*;",
    "M = (a a)* /\\ (a \\/ b)*;",
    "M = (a | b) /\\ (a b \\/ b a);",
    "M = let x, y { A(x) B(y) } /\\ let z { A(z) B(z) };",
    "M = !a*;",
    "M = (a | b)*;",
    "M = (a \\/ b a)* b;",
    "M = let x { !A(x) A(x) } \\/ b;",
    "M = (one | !one) \\/ a a a;",
];

/// Four ground events: `k` in {a, b} crossed with `v` in {1, 2}.
pub fn corpus_alphabet() -> Vec<Event> {
    let mut out = Vec::new();
    for k in ["a", "b"] {
        for v in [1, 2] {
            out.push(crate::event! { "k" => k, "v" => v });
        }
    }
    out
}

/// Parses corpus entry `i` together with [`CORPUS_TYPES`].
pub fn corpus_spec(i: usize) -> Spec {
    crate::parse::parse(&format!("{CORPUS_TYPES}\n{}", CORPUS[i])).expect("corpus entry parses")
}

fn match_single(
    name: &str,
    args: &[Arg],
    negated: bool,
    event: &Value,
    b: &Bindings,
    spec: &Spec,
) -> Option<Bindings> {
    let decl = spec.event_type(name)?;
    let mut concrete = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Arg::Var(v) => match b.get(v) {
                Some(val) => concrete.push(Arg::Value(val.clone())),
                None if negated => return None,
                None => concrete.push(a.clone()),
            },
            Arg::Value(_) => concrete.push(a.clone()),
        }
    }
    let hit = decl
        .instantiate(&concrete)
        .ok()
        .and_then(|p| match_pattern(&p, event, b));
    if negated {
        match hit {
            Some(_) => None,
            None => Some(b.clone()),
        }
    } else {
        hit
    }
}

fn combine(left: &Solutions, right: &Solutions) -> Solutions {
    let mut out = Solutions {
        bindings: Vec::new(),
        truncated: left.truncated || right.truncated,
    };
    for l in &left.bindings {
        for r in &right.bindings {
            if let Some(u) = l.unify(r) {
                if !out.bindings.contains(&u) {
                    out.bindings.push(u);
                }
            }
        }
    }
    out
}

/// Minimum and maximum (if finite) length of the traces `term` denotes.
/// Equation references are not unfolded and count as unbounded.
fn length_bounds(term: &Term) -> (usize, Option<usize>) {
    match term {
        Term::Epsilon => (0, Some(0)),
        Term::Fail => (usize::MAX, Some(0)),
        Term::Event { .. } => (1, Some(1)),
        Term::Seq(a, b) | Term::Shuffle(a, b) => {
            let (la, ha) = length_bounds(a);
            let (lb, hb) = length_bounds(b);
            (la.saturating_add(lb), ha.zip(hb).map(|(x, y)| x + y))
        }
        Term::And(a, b) => {
            let (la, ha) = length_bounds(a);
            let (lb, hb) = length_bounds(b);
            let hi = match (ha, hb) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) | (None, x) => x,
            };
            (la.max(lb), hi)
        }
        Term::Or(a, b) => {
            let (la, ha) = length_bounds(a);
            let (lb, hb) = length_bounds(b);
            (la.min(lb), ha.zip(hb).map(|(x, y)| x.max(y)))
        }
        Term::Star(a) => match length_bounds(a).1 {
            Some(0) => (0, Some(0)),
            _ => (0, None),
        },
        Term::Let(_, a) => length_bounds(a),
        Term::Eq(_) => (0, None),
    }
}

fn denote(term: &Term, trace: &[&Value], b: &Bindings, spec: &Spec, depth: usize) -> Solutions {
    let (lo, hi) = length_bounds(term);
    if trace.len() < lo || hi.is_some_and(|h| trace.len() > h) {
        return Solutions::none();
    }
    match term {
        Term::Epsilon => {
            if trace.is_empty() {
                Solutions::one(b.clone())
            } else {
                Solutions::none()
            }
        }
        Term::Fail => Solutions::none(),
        Term::Event {
            name,
            args,
            negated,
        } => {
            if trace.len() != 1 {
                return Solutions::none();
            }
            match match_single(name, args, *negated, trace[0], b, spec) {
                Some(nb) => Solutions::one(nb),
                None => Solutions::none(),
            }
        }
        Term::Or(l, r) => {
            let mut out = denote(l, trace, b, spec, depth);
            out.absorb(denote(r, trace, b, spec, depth));
            out
        }
        Term::And(l, r) => {
            let left = denote(l, trace, b, spec, depth);
            if left.bindings.is_empty() {
                return left;
            }
            combine(&left, &denote(r, trace, b, spec, depth))
        }
        Term::Seq(l, r) => {
            let mut out = Solutions::none();
            for split in 0..=trace.len() {
                let head = denote(l, &trace[..split], b, spec, depth);
                out.truncated |= head.truncated;
                for hb in &head.bindings {
                    out.absorb(denote(r, &trace[split..], hb, spec, depth));
                }
            }
            out
        }
        Term::Shuffle(l, r) => {
            let n = trace.len();
            let mut out = Solutions::none();
            for mask in 0u32..(1u32 << n) {
                let (mut mine, mut theirs) = (Vec::new(), Vec::new());
                for (i, v) in trace.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        mine.push(*v);
                    } else {
                        theirs.push(*v);
                    }
                }
                let left = denote(l, &mine, b, spec, depth);
                if left.bindings.is_empty() {
                    out.truncated |= left.truncated;
                    continue;
                }
                out.absorb(combine(&left, &denote(r, &theirs, b, spec, depth)));
            }
            out
        }
        Term::Let(vars, body) => {
            let mut inner = b.clone();
            for v in vars {
                inner.remove(v);
            }
            let sols = denote(body, trace, &inner, spec, depth);
            let mut out = Solutions {
                bindings: Vec::new(),
                truncated: sols.truncated,
            };
            for mut s in sols.bindings {
                for v in vars {
                    s.remove(v);
                    if let Some(outer) = b.get(v) {
                        s.insert(v.clone(), outer.clone());
                    }
                }
                if !out.bindings.contains(&s) {
                    out.bindings.push(s);
                }
            }
            out
        }
        Term::Star(inner) => {
            // the empty chain, or a nonempty chunk of `inner` followed by more
            let mut out = if trace.is_empty() {
                Solutions::one(b.clone())
            } else {
                Solutions::none()
            };
            if trace.is_empty() {
                return out;
            }
            if depth == 0 {
                out.truncated = true;
                return out;
            }
            for split in 1..=trace.len() {
                let head = denote(inner, &trace[..split], b, spec, depth - 1);
                out.truncated |= head.truncated;
                for hb in &head.bindings {
                    out.absorb(denote(term, &trace[split..], hb, spec, depth - 1));
                }
            }
            out
        }
        Term::Eq(name) => {
            if depth == 0 {
                return Solutions {
                    bindings: Vec::new(),
                    truncated: true,
                };
            }
            match spec.equation(name) {
                Some(body) => denote(body, trace, b, spec, depth - 1),
                None => Solutions::none(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{event, parse};

    const SRC: &str = r#"
        type ET1 matches { k: "a" };
        type ET2 matches { k: "b" };
        S = ET1 | ET2;
        St = ET1*;
        One = ET1;
        R = ET1 R \/ ET2;
        main One;
    "#;

    #[test]
    fn singleton() {
        let spec = parse(SRC).unwrap();
        let t = Term::Event {
            name: "ET1".into(),
            args: vec![],
            negated: false,
        };
        assert_eq!(member(&[event! { "k" => "a" }], &t, &spec, 1), Ok(true));
        assert_eq!(member(&[event! { "k" => "b" }], &t, &spec, 1), Ok(false));
    }

    #[test]
    fn shuffle_both_orders() {
        let spec = parse(SRC).unwrap();
        let s = spec.equation("S").unwrap();
        let (a, b) = (event! { "k" => "a" }, event! { "k" => "b" });
        assert_eq!(member(&[b.clone(), a.clone()], s, &spec, 1), Ok(true));
        assert_eq!(member(&[a.clone(), b.clone()], s, &spec, 1), Ok(true));
        assert_eq!(member(&[a.clone(), a], s, &spec, 1), Ok(false));
    }

    #[test]
    fn empty_trace_in_star() {
        let spec = parse(SRC).unwrap();
        assert_eq!(
            member(&[], spec.equation("St").unwrap(), &spec, 1),
            Ok(true)
        );
    }

    #[test]
    fn depth_exceeded_is_distinct() {
        let spec = parse(SRC).unwrap();
        let a = event! { "k" => "a" };
        let b = event! { "k" => "b" };
        let r = Term::Eq("R".into());
        let trace = vec![a.clone(), a.clone(), a, b];
        assert_eq!(member(&trace, &r, &spec, 2), Err(DepthExceeded));
        assert_eq!(member(&trace, &r, &spec, 4), Ok(true));
        assert_eq!(member(&trace[..3], &r, &spec, 10), Ok(false));
    }
}
