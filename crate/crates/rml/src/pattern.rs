//! Event-type patterns and the containment matching relation.
//!
//! A pattern mirrors the shape of a [`Value`]. Map patterns are partial: every
//! listed key must be present in the event and match recursively, while extra
//! event keys are ignored, at every nesting level. List patterns are total and
//! element-wise. Leaves are literals, variables, wildcards or numeric
//! comparisons.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::PatternError;
use crate::value::Value;

static CONSTRAINT_MISMATCHES: AtomicU64 = AtomicU64::new(0);

/// Number of times a comparison leaf met a non-numeric event value, or a
/// comparison bound that referenced an unbound variable.
pub fn constraint_mismatches() -> u64 {
    CONSTRAINT_MISMATCHES.load(Ordering::Relaxed)
}

fn note_constraint_mismatch() {
    CONSTRAINT_MISMATCHES.fetch_add(1, Ordering::Relaxed);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Right-hand side of a comparison leaf: a number, or a variable plus offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Num(Value),
    Var { name: String, offset: Value },
}

impl Bound {
    pub fn num(n: f64) -> Bound {
        Bound::Num(Value::Num(n))
    }

    fn resolve(&self, bindings: &Bindings) -> Option<f64> {
        match self {
            Bound::Num(v) => v.as_f64(),
            Bound::Var { name, offset } => {
                let base = bindings.get(name)?.as_f64()?;
                Some(base + offset.as_f64().unwrap_or(0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// Scalar literal; requires equality.
    Lit(Value),
    /// Named variable; unifies with a scalar event value.
    Var(String),
    /// `_`: any value, binds nothing.
    Any,
    /// Numeric comparison against a bound.
    Cmp(CmpOp, Bound),
    Map(BTreeMap<String, Pattern>),
    List(Vec<Pattern>),
}

impl Pattern {
    pub fn empty_map() -> Pattern {
        Pattern::Map(BTreeMap::new())
    }

    /// Variable names occurring in the pattern, including comparison bounds.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Var(name) | Pattern::Cmp(_, Bound::Var { name, .. }) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Pattern::Map(m) => m.values().for_each(|p| p.collect_vars(out)),
            Pattern::List(items) => items.iter().for_each(|p| p.collect_vars(out)),
            _ => {}
        }
    }

    /// Simultaneous substitution of variables by arguments.
    fn substitute(&self, subst: &BTreeMap<&str, &Arg>) -> Result<Pattern, PatternError> {
        Ok(match self {
            Pattern::Var(name) => match subst.get(name.as_str()) {
                Some(Arg::Value(v)) => Pattern::Lit(v.clone()),
                Some(Arg::Var(other)) => Pattern::Var(other.clone()),
                None => self.clone(),
            },
            Pattern::Cmp(op, Bound::Var { name, offset }) => match subst.get(name.as_str()) {
                Some(Arg::Value(Value::Num(n))) => {
                    Pattern::Cmp(*op, Bound::num(n + offset.as_f64().unwrap_or(0.0)))
                }
                Some(Arg::Value(other)) => {
                    return Err(PatternError::NonNumericBound {
                        var: name.clone(),
                        value: other.clone(),
                    })
                }
                Some(Arg::Var(other)) => Pattern::Cmp(
                    *op,
                    Bound::Var {
                        name: other.clone(),
                        offset: offset.clone(),
                    },
                ),
                None => self.clone(),
            },
            Pattern::Map(m) => Pattern::Map(
                m.iter()
                    .map(|(k, p)| Ok((k.clone(), p.substitute(subst)?)))
                    .collect::<Result<_, PatternError>>()?,
            ),
            Pattern::List(items) => Pattern::List(
                items
                    .iter()
                    .map(|p| p.substitute(subst))
                    .collect::<Result<_, _>>()?,
            ),
            Pattern::Lit(_) | Pattern::Any | Pattern::Cmp(_, Bound::Num(_)) => self.clone(),
        })
    }
}

/// Argument of a parameterized event type at a use site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Value(Value),
    Var(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Value(v) => write!(f, "{v}"),
            Arg::Var(name) => f.write_str(name),
        }
    }
}

/// A named, parameterized event type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventTypeDecl {
    pub name: String,
    pub params: Vec<String>,
    pub pattern: Pattern,
}

impl EventTypeDecl {
    /// Validates the declaration invariants: every parameter occurs in the
    /// pattern and the pattern uses no variable besides the parameters.
    pub fn new(
        name: impl Into<String>,
        params: Vec<String>,
        pattern: Pattern,
    ) -> Result<Self, PatternError> {
        let name = name.into();
        let used = pattern.vars();
        for (i, p) in params.iter().enumerate() {
            if p.is_empty() {
                return Err(PatternError::EmptyVarName);
            }
            if params[..i].contains(p) {
                return Err(PatternError::DuplicateParam {
                    decl: name,
                    param: p.clone(),
                });
            }
            if !used.contains(&p.as_str()) {
                return Err(PatternError::UnusedParam {
                    decl: name,
                    param: p.clone(),
                });
            }
        }
        if let Some(stray) = used.iter().find(|v| !params.iter().any(|p| p == *v)) {
            return Err(PatternError::UndeclaredVar {
                decl: name,
                var: stray.to_string(),
            });
        }
        Ok(EventTypeDecl {
            name,
            params,
            pattern,
        })
    }

    /// Substitutes `args` for the parameters, producing a concrete pattern.
    pub fn instantiate(&self, args: &[Arg]) -> Result<Pattern, PatternError> {
        if args.len() != self.params.len() {
            return Err(PatternError::ArityMismatch {
                decl: self.name.clone(),
                expected: self.params.len(),
                found: args.len(),
            });
        }
        if args.is_empty() {
            return Ok(self.pattern.clone());
        }
        let subst = self.params.iter().map(String::as_str).zip(args).collect();
        self.pattern.substitute(&subst)
    }
}

/// Partial map from variable names to scalar values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bindings(BTreeMap<String, Value>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn is_bound(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    /// Binds `name`, failing if it is already bound to a different value.
    pub fn bind(&mut self, name: &str, value: Value) -> bool {
        match self.0.get(name) {
            Some(existing) => *existing == value,
            None => {
                self.0.insert(name.to_owned(), value);
                true
            }
        }
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        self.0.remove(name)
    }

    pub fn insert(&mut self, name: String, value: Value) {
        self.0.insert(name, value);
    }

    /// Merges two binding sets; `None` when they disagree on a variable.
    pub fn unify(&self, other: &Bindings) -> Option<Bindings> {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            if !out.bind(k, v.clone()) {
                return None;
            }
        }
        Some(out)
    }
}

impl<K: Into<String>, V: Into<Value>> FromIterator<(K, V)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Bindings(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

/// Matches `value` against `pattern` under `bindings`.
///
/// Returns the extended bindings on success. The input bindings are never
/// modified.
pub fn match_pattern(pattern: &Pattern, value: &Value, bindings: &Bindings) -> Option<Bindings> {
    let mut out = bindings.clone();
    match_into(pattern, value, &mut out).then_some(out)
}

fn match_into(pattern: &Pattern, value: &Value, bindings: &mut Bindings) -> bool {
    match pattern {
        Pattern::Any => true,
        Pattern::Lit(lit) => lit == value,
        Pattern::Var(name) => value.is_scalar() && bindings.bind(name, value.clone()),
        Pattern::Cmp(op, bound) => {
            let (Some(lhs), Some(rhs)) = (value.as_f64(), bound.resolve(bindings)) else {
                note_constraint_mismatch();
                return false;
            };
            op.holds(lhs, rhs)
        }
        Pattern::Map(required) => {
            let Value::Map(actual) = value else {
                return false;
            };
            required.iter().all(|(k, p)| match actual.get(k) {
                Some(v) => match_into(p, v, bindings),
                None => false,
            })
        }
        Pattern::List(items) => {
            let Value::List(actual) = value else {
                return false;
            };
            items.len() == actual.len()
                && items
                    .iter()
                    .zip(actual)
                    .all(|(p, v)| match_into(p, v, bindings))
        }
    }
}
