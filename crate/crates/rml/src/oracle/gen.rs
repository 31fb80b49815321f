//! Proptest strategies for closed terms over [`CORPUS_TYPES`](super::CORPUS_TYPES).

use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::pattern::Arg;
use crate::term::{Spec, Term, TermRef};
use crate::value::Value;

#[derive(Debug, Clone)]
enum Shape {
    Leaf { ty: u8, arg: u8, negated: bool },
    Seq(Box<Shape>, Box<Shape>),
    Shuffle(Box<Shape>, Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
    Star(Box<Shape>),
    Let(u8, Box<Shape>),
}

fn shape(depth: u32, size: u32) -> impl Strategy<Value = Shape> {
    let leaf = (0u8..6, any::<u8>(), prop::bool::weighted(0.2))
        .prop_map(|(ty, arg, negated)| Shape::Leaf { ty, arg, negated });
    leaf.prop_recursive(depth, size, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Seq(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Shape::Shuffle(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Shape::Star(Box::new(a))),
            (1u8..3, inner).prop_map(|(n, a)| Shape::Let(n, Box::new(a))),
        ]
    })
}

const TYPES: [(&str, bool); 6] = [
    ("A", true),
    ("B", true),
    ("a", false),
    ("b", false),
    ("one", false),
    ("low", false),
];

fn build(shape: &Shape, scope: &mut Vec<String>, fresh: &mut usize) -> TermRef {
    match shape {
        Shape::Leaf { ty, arg, negated } => {
            let (name, param) = TYPES[*ty as usize % TYPES.len()];
            let args = if !param {
                vec![]
            } else if !scope.is_empty() && arg % 3 != 0 {
                vec![Arg::Var(scope[*arg as usize % scope.len()].clone())]
            } else {
                vec![Arg::Value(Value::from(i64::from(arg % 2) + 1))]
            };
            if *negated {
                Term::not_event(name, args)
            } else {
                Term::event(name, args)
            }
        }
        Shape::Seq(a, b) => Term::seq(build(a, scope, fresh), build(b, scope, fresh)),
        Shape::Shuffle(a, b) => Term::shuffle(build(a, scope, fresh), build(b, scope, fresh)),
        Shape::And(a, b) => Term::and(build(a, scope, fresh), build(b, scope, fresh)),
        Shape::Or(a, b) => Term::or(build(a, scope, fresh), build(b, scope, fresh)),
        Shape::Star(a) => Term::star(build(a, scope, fresh)),
        Shape::Let(n, body) => {
            let vars: Vec<String> = (0..*n)
                .map(|_| {
                    *fresh += 1;
                    format!("v{fresh}")
                })
                .collect();
            let mark = scope.len();
            scope.extend(vars.iter().cloned());
            let body = build(body, scope, fresh);
            scope.truncate(mark);
            Term::let_in(vars, body)
        }
    }
}

/// Closed, non-recursive terms of bounded depth over the corpus event types.
pub fn arb_term(depth: u32) -> impl Strategy<Value = TermRef> {
    shape(depth, 24).prop_map(|s| build(&s, &mut Vec::new(), &mut 0))
}

/// A single-equation spec `M = term;` over the corpus event types.
pub fn arb_spec(depth: u32) -> impl Strategy<Value = Spec> {
    arb_term(depth).prop_map(|t| {
        let types = super::corpus_spec(0).event_types().clone();
        Spec::new(types, BTreeMap::from([("M".to_string(), t)]), "M")
            .expect("generated term is well formed")
    })
}
