//! Trace-expression terms and validated specifications.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::ParseError;
use crate::pattern::{Arg, Bindings, EventTypeDecl};

pub type TermRef = Arc<Term>;

/// A trace expression.
///
/// `Epsilon` and `Fail` are normal forms produced by the engine; they have no
/// surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Use of an event type, possibly negated (`!name(args)`).
    Event {
        name: String,
        args: Vec<Arg>,
        negated: bool,
    },
    Seq(TermRef, TermRef),
    Shuffle(TermRef, TermRef),
    And(TermRef, TermRef),
    Or(TermRef, TermRef),
    Let(Vec<String>, TermRef),
    Star(TermRef),
    /// Reference to a named equation.
    Eq(String),
    Epsilon,
    Fail,
}

impl Term {
    pub fn event(name: &str, args: Vec<Arg>) -> TermRef {
        Arc::new(Term::Event {
            name: name.into(),
            args,
            negated: false,
        })
    }

    pub fn not_event(name: &str, args: Vec<Arg>) -> TermRef {
        Arc::new(Term::Event {
            name: name.into(),
            args,
            negated: true,
        })
    }

    pub fn seq(a: TermRef, b: TermRef) -> TermRef {
        Arc::new(Term::Seq(a, b))
    }

    pub fn shuffle(a: TermRef, b: TermRef) -> TermRef {
        Arc::new(Term::Shuffle(a, b))
    }

    pub fn and(a: TermRef, b: TermRef) -> TermRef {
        Arc::new(Term::And(a, b))
    }

    pub fn or(a: TermRef, b: TermRef) -> TermRef {
        Arc::new(Term::Or(a, b))
    }

    pub fn star(a: TermRef) -> TermRef {
        Arc::new(Term::Star(a))
    }

    pub fn let_in(vars: Vec<String>, body: TermRef) -> TermRef {
        Arc::new(Term::Let(vars, body))
    }

    pub fn eq_ref(name: &str) -> TermRef {
        Arc::new(Term::Eq(name.into()))
    }

    pub fn epsilon() -> TermRef {
        Arc::new(Term::Epsilon)
    }

    pub fn fail() -> TermRef {
        Arc::new(Term::Fail)
    }

    /// True when `var` occurs free (outside any `let` rebinding it).
    pub fn has_free(&self, var: &str) -> bool {
        match self {
            Term::Event { args, .. } => args.iter().any(|a| matches!(a, Arg::Var(v) if v == var)),
            Term::Seq(a, b) | Term::Shuffle(a, b) | Term::And(a, b) | Term::Or(a, b) => {
                a.has_free(var) || b.has_free(var)
            }
            Term::Let(vars, body) => !vars.iter().any(|v| v == var) && body.has_free(var),
            Term::Star(a) => a.has_free(var),
            Term::Eq(_) | Term::Epsilon | Term::Fail => false,
        }
    }

    /// Replaces free occurrences of bound variables by their values.
    ///
    /// Equation references are closed, so substitution never unfolds them.
    pub fn substitute(self: &TermRef, bindings: &Bindings) -> TermRef {
        if bindings.is_empty() {
            return self.clone();
        }
        match &**self {
            Term::Event {
                name,
                args,
                negated,
            } => {
                if !args
                    .iter()
                    .any(|a| matches!(a, Arg::Var(v) if bindings.is_bound(v)))
                {
                    return self.clone();
                }
                let args = args
                    .iter()
                    .map(|a| match a {
                        Arg::Var(v) => bindings
                            .get(v)
                            .map(|val| Arg::Value(val.clone()))
                            .unwrap_or_else(|| a.clone()),
                        Arg::Value(_) => a.clone(),
                    })
                    .collect();
                Arc::new(Term::Event {
                    name: name.clone(),
                    args,
                    negated: *negated,
                })
            }
            Term::Seq(a, b) => Term::seq(a.substitute(bindings), b.substitute(bindings)),
            Term::Shuffle(a, b) => Term::shuffle(a.substitute(bindings), b.substitute(bindings)),
            Term::And(a, b) => Term::and(a.substitute(bindings), b.substitute(bindings)),
            Term::Or(a, b) => Term::or(a.substitute(bindings), b.substitute(bindings)),
            Term::Star(a) => Term::star(a.substitute(bindings)),
            Term::Let(vars, body) => {
                let mut inner = bindings.clone();
                for v in vars {
                    inner.remove(v);
                }
                Term::let_in(vars.clone(), body.substitute(&inner))
            }
            Term::Eq(_) | Term::Epsilon | Term::Fail => self.clone(),
        }
    }

    /// Number of nodes, used to bound test generators and diagnostics.
    pub fn size(&self) -> usize {
        match self {
            Term::Seq(a, b) | Term::Shuffle(a, b) | Term::And(a, b) | Term::Or(a, b) => {
                1 + a.size() + b.size()
            }
            Term::Let(_, a) | Term::Star(a) => 1 + a.size(),
            _ => 1,
        }
    }
}

/// A validated property: event types, equations and the main equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    event_types: BTreeMap<String, EventTypeDecl>,
    equations: BTreeMap<String, TermRef>,
    main: String,
    nullable_equations: BTreeSet<String>,
}

impl Spec {
    /// Builds a specification and checks name resolution, arities, variable
    /// scoping and guardedness of recursion.
    pub fn new(
        event_types: BTreeMap<String, EventTypeDecl>,
        equations: BTreeMap<String, TermRef>,
        main: impl Into<String>,
    ) -> Result<Spec, ParseError> {
        let main = main.into();
        if equations.is_empty() {
            return Err(ParseError::NoEquations);
        }
        if !equations.contains_key(&main) {
            return Err(ParseError::MissingMain(main));
        }
        let nowhere = crate::error::Location { line: 0, column: 0 };
        for name in event_types.keys() {
            if equations.contains_key(name) {
                return Err(ParseError::Duplicate {
                    at: nowhere,
                    name: name.clone(),
                });
            }
        }
        for body in equations.values() {
            check_term(body, &event_types, &equations, &mut Vec::new())?;
        }
        let mut spec = Spec {
            event_types,
            equations,
            main,
            nullable_equations: BTreeSet::new(),
        };
        spec.nullable_equations = spec.compute_nullable_equations();
        spec.check_guarded()?;
        Ok(spec)
    }

    pub fn event_types(&self) -> &BTreeMap<String, EventTypeDecl> {
        &self.event_types
    }

    pub fn event_type(&self, name: &str) -> Option<&EventTypeDecl> {
        self.event_types.get(name)
    }

    pub fn equations(&self) -> &BTreeMap<String, TermRef> {
        &self.equations
    }

    pub fn equation(&self, name: &str) -> Option<&TermRef> {
        self.equations.get(name)
    }

    pub fn main(&self) -> &str {
        &self.main
    }

    pub fn main_term(&self) -> TermRef {
        Term::eq_ref(&self.main)
    }

    /// Whether the empty trace belongs to the denotation of `term`.
    pub fn nullable(&self, term: &Term) -> bool {
        nullable_with(term, &|name| self.nullable_equations.contains(name))
    }

    // Least fixpoint: equations start non-nullable, so revisiting an
    // equation on a cycle contributes `false`.
    fn compute_nullable_equations(&self) -> BTreeSet<String> {
        let mut known = BTreeSet::new();
        loop {
            let mut changed = false;
            for (name, body) in &self.equations {
                if !known.contains(name) && nullable_with(body, &|n| known.contains(n)) {
                    known.insert(name.clone());
                    changed = true;
                }
            }
            if !changed {
                return known;
            }
        }
    }

    fn unguarded_refs(&self, term: &Term, out: &mut BTreeSet<String>) {
        match term {
            Term::Eq(name) => {
                out.insert(name.clone());
            }
            Term::Seq(a, b) => {
                self.unguarded_refs(a, out);
                if self.nullable(a) {
                    self.unguarded_refs(b, out);
                }
            }
            Term::Shuffle(a, b) | Term::And(a, b) | Term::Or(a, b) => {
                self.unguarded_refs(a, out);
                self.unguarded_refs(b, out);
            }
            Term::Let(_, a) | Term::Star(a) => self.unguarded_refs(a, out),
            Term::Event { .. } | Term::Epsilon | Term::Fail => {}
        }
    }

    fn check_guarded(&self) -> Result<(), ParseError> {
        let graph: BTreeMap<&str, BTreeSet<String>> = self
            .equations
            .iter()
            .map(|(name, body)| {
                let mut refs = BTreeSet::new();
                self.unguarded_refs(body, &mut refs);
                (name.as_str(), refs)
            })
            .collect();

        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        let mut stack: Vec<&str> = Vec::new();

        fn visit<'a>(
            node: &'a str,
            graph: &'a BTreeMap<&'a str, BTreeSet<String>>,
            state: &mut BTreeMap<&'a str, u8>,
            stack: &mut Vec<&'a str>,
        ) -> Result<(), ParseError> {
            state.insert(node, 1);
            stack.push(node);
            for next in &graph[node] {
                match state.get(next.as_str()).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|n| *n == next).unwrap_or(0);
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|s| s.to_string()).collect();
                        cycle.push(next.clone());
                        return Err(ParseError::UnguardedRecursion { cycle });
                    }
                    0 => {
                        let key = graph
                            .get_key_value(next.as_str())
                            .map(|(k, _)| *k)
                            .unwrap_or(node);
                        visit(key, graph, state, stack)?;
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(node, 2);
            Ok(())
        }

        for name in graph.keys() {
            if state.get(name).copied().unwrap_or(0) == 0 {
                visit(name, &graph, &mut state, &mut stack)?;
            }
        }
        Ok(())
    }
}

fn nullable_with(term: &Term, eq_nullable: &dyn Fn(&str) -> bool) -> bool {
    match term {
        Term::Epsilon | Term::Star(_) => true,
        Term::Event { .. } | Term::Fail => false,
        Term::Seq(a, b) | Term::And(a, b) | Term::Shuffle(a, b) => {
            nullable_with(a, eq_nullable) && nullable_with(b, eq_nullable)
        }
        Term::Or(a, b) => nullable_with(a, eq_nullable) || nullable_with(b, eq_nullable),
        Term::Let(_, body) => nullable_with(body, eq_nullable),
        Term::Eq(name) => eq_nullable(name),
    }
}

fn check_term(
    term: &Term,
    types: &BTreeMap<String, EventTypeDecl>,
    equations: &BTreeMap<String, TermRef>,
    scope: &mut Vec<String>,
) -> Result<(), ParseError> {
    let nowhere = crate::error::Location { line: 0, column: 0 };
    match term {
        Term::Event { name, args, .. } => {
            let decl = types.get(name).ok_or_else(|| ParseError::UnresolvedName {
                at: nowhere,
                name: name.clone(),
            })?;
            if decl.params.len() != args.len() {
                return Err(ParseError::Pattern {
                    at: nowhere,
                    source: crate::error::PatternError::ArityMismatch {
                        decl: name.clone(),
                        expected: decl.params.len(),
                        found: args.len(),
                    },
                });
            }
            for arg in args {
                if let Arg::Var(v) = arg {
                    if !scope.contains(v) {
                        return Err(ParseError::UnboundVariable {
                            at: nowhere,
                            var: v.clone(),
                        });
                    }
                }
            }
            Ok(())
        }
        Term::Eq(name) => {
            if equations.contains_key(name) {
                Ok(())
            } else {
                Err(ParseError::UnresolvedName {
                    at: nowhere,
                    name: name.clone(),
                })
            }
        }
        Term::Seq(a, b) | Term::Shuffle(a, b) | Term::And(a, b) | Term::Or(a, b) => {
            check_term(a, types, equations, scope)?;
            check_term(b, types, equations, scope)
        }
        Term::Star(a) => check_term(a, types, equations, scope),
        Term::Let(vars, body) => {
            let depth = scope.len();
            scope.extend(vars.iter().cloned());
            let result = check_term(body, types, equations, scope);
            scope.truncate(depth);
            result
        }
        Term::Epsilon | Term::Fail => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Pattern;

    fn types(names: &[&str]) -> BTreeMap<String, EventTypeDecl> {
        names
            .iter()
            .map(|n| {
                (
                    n.to_string(),
                    EventTypeDecl::new(*n, vec![], Pattern::empty_map()).unwrap(),
                )
            })
            .collect()
    }

    fn spec_with(eqs: Vec<(&str, TermRef)>) -> Result<Spec, ParseError> {
        let main = eqs[0].0.to_string();
        Spec::new(
            types(&["a", "b"]),
            eqs.into_iter().map(|(n, t)| (n.to_string(), t)).collect(),
            main,
        )
    }

    #[test]
    fn nullable_basics() {
        let spec = spec_with(vec![("M", Term::event("a", vec![]))]).unwrap();
        assert!(spec.nullable(&Term::Star(Term::event("a", vec![]))));
        assert!(!spec.nullable(&Term::Event {
            name: "a".into(),
            args: vec![],
            negated: false
        }));
        assert!(!spec.nullable(&Term::Fail));
        assert!(spec.nullable(&Term::Epsilon));
        assert!(spec.nullable(&Term::Or(Term::event("a", vec![]), Term::epsilon())));
        assert!(!spec.nullable(&Term::Shuffle(Term::event("a", vec![]), Term::epsilon())));
    }

    #[test]
    fn recursive_equation_guarded() {
        // M = a M \/ b
        let m = Term::or(
            Term::seq(Term::event("a", vec![]), Term::eq_ref("M")),
            Term::event("b", vec![]),
        );
        let spec = spec_with(vec![("M", m)]).unwrap();
        assert!(!spec.nullable(&Term::Eq("M".into())));
    }

    #[test]
    fn nullable_fixpoint_through_equations() {
        // M = N ; N = a* ; both nullable
        let spec = spec_with(vec![
            ("M", Term::eq_ref("N")),
            ("N", Term::star(Term::event("a", vec![]))),
        ])
        .unwrap();
        assert!(spec.nullable(&Term::Eq("M".into())));
    }

    #[test]
    fn left_recursion_rejected() {
        let m = Term::or(
            Term::seq(Term::eq_ref("M"), Term::event("a", vec![])),
            Term::event("b", vec![]),
        );
        assert!(matches!(
            spec_with(vec![("M", m)]),
            Err(ParseError::UnguardedRecursion { .. })
        ));
        // through a nullable prefix
        let m = Term::seq(Term::star(Term::event("a", vec![])), Term::eq_ref("M"));
        assert!(matches!(
            spec_with(vec![("M", m)]),
            Err(ParseError::UnguardedRecursion { .. })
        ));
        // mutual
        let r = spec_with(vec![
            ("M", Term::eq_ref("N")),
            ("N", Term::or(Term::eq_ref("M"), Term::event("a", vec![]))),
        ]);
        assert!(matches!(r, Err(ParseError::UnguardedRecursion { .. })));
    }

    #[test]
    fn unresolved_and_unbound_rejected() {
        assert!(matches!(
            spec_with(vec![("M", Term::event("zzz", vec![]))]),
            Err(ParseError::UnresolvedName { .. })
        ));
        assert!(matches!(
            spec_with(vec![("M", Term::eq_ref("Q"))]),
            Err(ParseError::UnresolvedName { .. })
        ));
    }

    #[test]
    fn substitution_respects_shadowing() {
        let t = Term::seq(
            Term::event("t", vec![Arg::Var("x".into())]),
            Term::let_in(
                vec!["x".into()],
                Term::event("t", vec![Arg::Var("x".into())]),
            ),
        );
        let b: Bindings = [("x", 3)].into_iter().collect();
        let s = t.substitute(&b);
        let Term::Seq(first, second) = &*s else {
            panic!()
        };
        assert_eq!(
            **first,
            Term::Event {
                name: "t".into(),
                args: vec![Arg::Value(3.into())],
                negated: false
            }
        );
        assert!(!second.has_free("x"));
        let Term::Let(_, body) = &**second else {
            panic!()
        };
        assert!(body.has_free("x"));
    }
}
