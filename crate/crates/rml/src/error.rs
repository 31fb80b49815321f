use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("event root must be a JSON object")]
    NotAMap,
    #[error("numbers must be finite")]
    NonFiniteNumber,
    #[error("null values are not allowed in events")]
    Null,
    #[error("map keys must be nonempty")]
    EmptyKey,
    #[error("invalid JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("event type `{decl}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        decl: String,
        expected: usize,
        found: usize,
    },
    #[error("parameter `{param}` of `{decl}` does not occur in its pattern")]
    UnusedParam { decl: String, param: String },
    #[error("parameter `{param}` of `{decl}` is declared twice")]
    DuplicateParam { decl: String, param: String },
    #[error("variable `{var}` in `{decl}` is not a parameter")]
    UndeclaredVar { decl: String, var: String },
    #[error("variable names must be nonempty")]
    EmptyVarName,
    #[error("comparison bound `{var}` instantiated with non-numeric {value}")]
    NonNumericBound { var: String, value: Value },
}

/// Position in property source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{at}: syntax error: {message}")]
    Syntax { at: Location, message: String },
    #[error("{at}: unresolved name `{name}`")]
    UnresolvedName { at: Location, name: String },
    #[error("{at}: `{name}` is declared more than once")]
    Duplicate { at: Location, name: String },
    #[error("{at}: {source}")]
    Pattern {
        at: Location,
        #[source]
        source: PatternError,
    },
    #[error("{at}: variable `{var}` is not bound by an enclosing let")]
    UnboundVariable { at: Location, var: String },
    #[error("{at}: equation `{name}` takes no arguments")]
    EquationArgs { at: Location, name: String },
    #[error("unguarded recursion through {}", cycle.join(" -> "))]
    UnguardedRecursion { cycle: Vec<String> },
    #[error("main equation `{0}` is not defined")]
    MissingMain(String),
    #[error("specification defines no equations")]
    NoEquations,
}

impl ParseError {
    pub fn location(&self) -> Option<Location> {
        match self {
            ParseError::Syntax { at, .. }
            | ParseError::UnresolvedName { at, .. }
            | ParseError::Duplicate { at, .. }
            | ParseError::Pattern { at, .. }
            | ParseError::UnboundVariable { at, .. }
            | ParseError::EquationArgs { at, .. } => Some(*at),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("monitor overload: {alternatives} alternatives exceed the cap of {cap}")]
    Overload { alternatives: usize, cap: usize },
}
