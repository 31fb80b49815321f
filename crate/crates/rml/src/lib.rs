//! Trace-expression specifications and an incremental runtime monitor.
//!
//! A [`Spec`] declares parametric event types and a set of mutually
//! recursive equations over them. [`MonitorState`] consumes JSON events one
//! at a time and reports a three-valued [`Verdict`].
//!
//! ```
//! use chatguard_rml::{event, parse, MonitorState, Verdict};
//!
//! let spec = parse(r#"
//!     type ping matches { kind: "ping" };
//!     type pong matches { kind: "pong" };
//!     Main = (ping pong)*;
//! "#).unwrap();
//!
//! let mut m = MonitorState::new(spec);
//! assert_eq!(m.advance(&event! { "kind" => "ping" }).unwrap().verdict, Verdict::Inconclusive);
//! assert!(m.advance(&event! { "kind" => "pong" }).unwrap().currently_accepting);
//! assert_eq!(m.advance(&event! { "kind" => "pong" }).unwrap().verdict, Verdict::False);
//! ```

pub mod engine;
pub mod error;
pub mod parse;
pub mod pattern;
pub mod print;
pub mod term;
pub mod value;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use engine::{
    derive, simplify, Alternative, Diagnostics, MonitorState, StepOutcome, Verdict,
    DEFAULT_ALTERNATIVE_CAP,
};
pub use error::{EventError, Location, MonitorError, ParseError, PatternError};
pub use parse::parse;
pub use pattern::{
    constraint_mismatches, match_pattern, Arg, Bindings, Bound, CmpOp, EventTypeDecl, Pattern,
};
pub use print::{print_spec, write_pattern};
pub use term::{Spec, Term, TermRef};
pub use value::{Event, Value};
