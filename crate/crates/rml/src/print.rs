//! Canonical pretty-printer for specifications and terms.
//!
//! Output parses back to an equal [`Spec`]: event types and equations are
//! emitted in name order, the main equation is declared explicitly and
//! parentheses are inserted only where precedence requires them.

use std::fmt::{self, Write};

use crate::pattern::{Arg, Bound, Pattern};
use crate::term::{Spec, Term};
use crate::value::Value;

const OR: u8 = 1;
const AND: u8 = 2;
const SHUFFLE: u8 = 3;
const SEQ: u8 = 4;
const POSTFIX: u8 = 5;

pub fn print_spec(spec: &Spec) -> String {
    let mut out = String::new();
    for decl in spec.event_types().values() {
        out.push_str("type ");
        out.push_str(&decl.name);
        if !decl.params.is_empty() {
            let _ = write!(out, "({})", decl.params.join(", "));
        }
        out.push_str(" matches ");
        write_pattern(&mut out, &decl.pattern);
        out.push_str(";\n");
    }
    if !spec.event_types().is_empty() {
        out.push('\n');
    }
    for (name, body) in spec.equations() {
        let _ = writeln!(out, "{name} = {};", TermDisplay(body, 0));
    }
    let _ = writeln!(out, "main {};", spec.main());
    out
}

fn write_number(out: &mut String, n: f64) {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        let _ = write!(out, "{}", n as i64);
    } else {
        let _ = write!(out, "{n}");
    }
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Num(n) => write_number(out, *n),
        Value::Str(s) => out.push_str(&serde_json::Value::String(s.clone()).to_string()),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        other => out.push_str(&other.to_json().to_string()),
    }
}

fn is_plain_key(key: &str) -> bool {
    let mut chars = key.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(
            key,
            "type" | "matches" | "let" | "main" | "true" | "false" | "_"
        )
}

pub fn write_pattern(out: &mut String, pattern: &Pattern) {
    match pattern {
        Pattern::Lit(v) => write_scalar(out, v),
        Pattern::Var(name) => out.push_str(name),
        Pattern::Any => out.push('_'),
        Pattern::Cmp(op, bound) => {
            out.push_str(op.symbol());
            out.push(' ');
            match bound {
                Bound::Num(v) => write_scalar(out, v),
                Bound::Var { name, offset } => {
                    out.push_str(name);
                    let off = offset.as_f64().unwrap_or(0.0);
                    if off > 0.0 {
                        out.push_str(" + ");
                        write_number(out, off);
                    } else if off < 0.0 {
                        out.push_str(" - ");
                        write_number(out, -off);
                    }
                }
            }
        }
        Pattern::Map(m) if m.is_empty() => out.push_str("{}"),
        Pattern::Map(m) => {
            out.push_str("{ ");
            for (i, (k, p)) in m.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                if is_plain_key(k) {
                    out.push_str(k);
                } else {
                    write_scalar(out, &Value::Str(k.clone()));
                }
                out.push_str(": ");
                write_pattern(out, p);
            }
            out.push_str(" }");
        }
        Pattern::List(items) => {
            out.push('[');
            for (i, p) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_pattern(out, p);
            }
            out.push(']');
        }
    }
}

struct TermDisplay<'a>(&'a Term, u8);

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.0, self.1)
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    a: &Term,
    b: &Term,
    op: &str,
    prec: u8,
    ctx: u8,
) -> fmt::Result {
    let paren = ctx > prec;
    if paren {
        f.write_str("(")?;
    }
    write_term(f, a, prec)?;
    f.write_str(op)?;
    write_term(f, b, prec + 1)?;
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, term: &Term, ctx: u8) -> fmt::Result {
    match term {
        Term::Event {
            name,
            args,
            negated,
        } => {
            if *negated {
                f.write_str("!")?;
            }
            f.write_str(name)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match a {
                        Arg::Var(v) => f.write_str(v)?,
                        Arg::Value(v) => {
                            let mut s = String::new();
                            write_scalar(&mut s, v);
                            f.write_str(&s)?;
                        }
                    }
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::Or(a, b) => binary(f, a, b, " \\/ ", OR, ctx),
        Term::And(a, b) => binary(f, a, b, " /\\ ", AND, ctx),
        Term::Shuffle(a, b) => binary(f, a, b, " | ", SHUFFLE, ctx),
        Term::Seq(a, b) => binary(f, a, b, " ", SEQ, ctx),
        Term::Star(a) => {
            write_term(f, a, POSTFIX)?;
            f.write_str("*")
        }
        Term::Let(vars, body) => {
            write!(f, "let {} {{ {} }}", vars.join(", "), TermDisplay(body, 0))
        }
        Term::Eq(name) => f.write_str(name),
        Term::Epsilon => f.write_str("<eps>"),
        Term::Fail => f.write_str("<fail>"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_spec(self))
    }
}
