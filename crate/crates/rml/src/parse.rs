//! Recursive-descent parser for `.prop` property files.
//!
//! ```text
//! spec     := item*
//! item     := "type" IDENT params? "matches" pattern ";"
//!           | IDENT "=" term ";"
//!           | "main" IDENT ";"
//! term     := and ("\/" and)*
//! and      := shuffle ("/\" shuffle)*
//! shuffle  := seq ("|" seq)*
//! seq      := postfix postfix*            juxtaposition
//! postfix  := atom "*"*
//! atom     := "(" term ")" | "let" vars "{" term "}" | "{" "let" vars ";" term "}"
//!           | "!"? IDENT args?
//! pattern  := "{" (key ":" leaf),* "}"
//! leaf     := pattern | "[" leaf,* "]" | STRING | NUMBER | "true" | "false"
//!           | IDENT | "_" | cmp (NUMBER | IDENT (("+"|"-") NUMBER)?)
//! ```
//!
//! `//` starts a line comment. When no `main` item is present the first
//! equation is the main one.

use std::collections::BTreeMap;

use crate::error::{Location, ParseError};
use crate::pattern::{Arg, Bound, CmpOp, EventTypeDecl, Pattern};
use crate::term::{Spec, Term, TermRef};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    at: Location,
}

const SYMBOLS: &[&str] = &[
    "\\/", "/\\", "<=", ">=", "==", "!=", "(", ")", "{", "}", "[", "]", ",", ";", ":", "=", "|",
    "*", "!", "<", ">", "+", "-",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let at = Location { line, column: col };
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance!(1);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                at,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance!(1);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                advance!(1);
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    advance!(1);
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!(1);
                }
            }
            let text: String = chars[start..i].iter().collect();
            let n: f64 = text.parse().map_err(|_| ParseError::Syntax {
                at,
                message: format!("invalid number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(n),
                at,
            });
            continue;
        }
        if c == '"' {
            advance!(1);
            let mut s = String::new();
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(ParseError::Syntax {
                        at,
                        message: "unterminated string".into(),
                    });
                };
                advance!(1);
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(&esc) = chars.get(i) else {
                            return Err(ParseError::Syntax {
                                at,
                                message: "unterminated string".into(),
                            });
                        };
                        advance!(1);
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            '"' => '"',
                            '\\' => '\\',
                            '/' => '/',
                            'u' => {
                                let hex: String = chars
                                    .get(i..i + 4)
                                    .map(|h| h.iter().collect())
                                    .unwrap_or_default();
                                let code =
                                    u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
                                let Some(code) = code else {
                                    return Err(ParseError::Syntax {
                                        at,
                                        message: "invalid unicode escape".into(),
                                    });
                                };
                                advance!(4);
                                code
                            }
                            other => {
                                return Err(ParseError::Syntax {
                                    at,
                                    message: format!("unknown escape `\\{other}`"),
                                })
                            }
                        });
                    }
                    ch => s.push(ch),
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                at,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                advance!(sym.chars().count());
                out.push(Token {
                    tok: Tok::Sym(sym),
                    at,
                });
            }
            None => {
                return Err(ParseError::Syntax {
                    at,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        at: Location { line, column: col },
    });
    Ok(out)
}

/// Term as written, before names are resolved.
#[derive(Debug)]
enum Raw {
    Ref {
        name: String,
        args: Vec<(Arg, Location)>,
        negated: bool,
        at: Location,
    },
    Seq(Box<Raw>, Box<Raw>),
    Shuffle(Box<Raw>, Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Let(Vec<String>, Box<Raw>),
    Star(Box<Raw>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const KEYWORDS: &[&str] = &["type", "matches", "let", "main", "true", "false"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn at(&self) -> Location {
        self.tokens[self.pos].at
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            at: self.at(),
            message: message.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.is_sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected `{sym}`, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected `{kw}`, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), ParseError> {
        let at = self.at();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok((s, at))
            }
            other => self.error(format!(
                "expected identifier, found {}",
                Self::describe(&other)
            )),
        }
    }

    fn var_name(&mut self) -> Result<String, ParseError> {
        let (name, _) = self.ident()?;
        if name == "_" {
            return self.error("`_` cannot be used as a variable name");
        }
        Ok(name)
    }

    fn name_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = vec![self.var_name()?];
        while self.is_sym(",") {
            self.bump();
            names.push(self.var_name()?);
        }
        Ok(names)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let negative = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(if negative { -n } else { n })
            }
            other => self.error(format!("expected number, found {}", Self::describe(&other))),
        }
    }

    // ---- patterns ----

    fn pattern_map(&mut self) -> Result<Pattern, ParseError> {
        self.expect_sym("{")?;
        let mut map = BTreeMap::new();
        while !self.is_sym("}") {
            let at = self.at();
            let key = match self.bump().tok {
                Tok::Ident(s) => s,
                Tok::Str(s) if !s.is_empty() => s,
                other => {
                    return Err(ParseError::Syntax {
                        at,
                        message: format!("expected key, found {}", Self::describe(&other)),
                    })
                }
            };
            self.expect_sym(":")?;
            let leaf = self.pattern_leaf()?;
            if map.insert(key.clone(), leaf).is_some() {
                return Err(ParseError::Duplicate { at, name: key });
            }
            if !self.is_sym(",") {
                break;
            }
            self.bump();
        }
        self.expect_sym("}")?;
        Ok(Pattern::Map(map))
    }

    fn pattern_leaf(&mut self) -> Result<Pattern, ParseError> {
        let op = match self.peek() {
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            Tok::Sym("==") => Some(CmpOp::Eq),
            Tok::Sym("!=") => Some(CmpOp::Ne),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let bound = if let Tok::Ident(_) = self.peek() {
                let name = self.var_name()?;
                let offset = if self.is_sym("+") || self.is_sym("-") {
                    let minus = self.is_sym("-");
                    self.bump();
                    let n = self.number()?;
                    if minus {
                        -n
                    } else {
                        n
                    }
                } else {
                    0.0
                };
                Bound::Var {
                    name,
                    offset: Value::Num(offset),
                }
            } else {
                Bound::num(self.number()?)
            };
            return Ok(Pattern::Cmp(op, bound));
        }
        match self.peek().clone() {
            Tok::Sym("{") => self.pattern_map(),
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                while !self.is_sym("]") {
                    items.push(self.pattern_leaf()?);
                    if !self.is_sym(",") {
                        break;
                    }
                    self.bump();
                }
                self.expect_sym("]")?;
                Ok(Pattern::List(items))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Pattern::Lit(Value::Str(s)))
            }
            Tok::Num(_) | Tok::Sym("-") => Ok(Pattern::Lit(Value::Num(self.number()?))),
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Pattern::Lit(Value::Bool(s == "true")))
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(Pattern::Any)
            }
            Tok::Ident(_) => Ok(Pattern::Var(self.var_name()?)),
            other => self.error(format!(
                "expected pattern, found {}",
                Self::describe(&other)
            )),
        }
    }

    // ---- terms ----

    fn term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.and_term()?;
        while self.is_sym("\\/") {
            self.bump();
            lhs = Raw::Or(Box::new(lhs), Box::new(self.and_term()?));
        }
        Ok(lhs)
    }

    fn and_term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.shuffle_term()?;
        while self.is_sym("/\\") {
            self.bump();
            lhs = Raw::And(Box::new(lhs), Box::new(self.shuffle_term()?));
        }
        Ok(lhs)
    }

    fn shuffle_term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.seq_term()?;
        while self.is_sym("|") {
            self.bump();
            lhs = Raw::Shuffle(Box::new(lhs), Box::new(self.seq_term()?));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Sym("(") | Tok::Sym("!") | Tok::Sym("{") => true,
            Tok::Ident(s) => s == "let" || !KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn seq_term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.postfix()?;
        while self.starts_atom() {
            lhs = Raw::Seq(Box::new(lhs), Box::new(self.postfix()?));
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Raw, ParseError> {
        let mut t = self.atom()?;
        while self.is_sym("*") {
            self.bump();
            t = Raw::Star(Box::new(t));
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        if self.is_sym("(") {
            self.bump();
            let t = self.term()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("let") {
            self.bump();
            let vars = self.name_list()?;
            self.expect_sym("{")?;
            let body = self.term()?;
            self.expect_sym("}")?;
            return Ok(Raw::Let(vars, Box::new(body)));
        }
        if self.is_sym("{") {
            self.bump();
            self.expect_kw("let")?;
            let vars = self.name_list()?;
            self.expect_sym(";")?;
            let body = self.term()?;
            self.expect_sym("}")?;
            return Ok(Raw::Let(vars, Box::new(body)));
        }
        let negated = if self.is_sym("!") {
            self.bump();
            true
        } else {
            false
        };
        let (name, at) = self.ident()?;
        let mut args = Vec::new();
        // Arguments must follow the name directly: `t(x)` is a use with
        // arguments, `t (x)` is `t` followed by the term `x`.
        let next = self.at();
        let adjacent = next.line == at.line && next.column == at.column + name.chars().count();
        if adjacent && self.is_sym("(") {
            self.bump();
            while !self.is_sym(")") {
                let arg_at = self.at();
                let arg = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.bump();
                        Arg::Value(Value::Str(s))
                    }
                    Tok::Num(_) | Tok::Sym("-") => Arg::Value(Value::Num(self.number()?)),
                    Tok::Ident(s) if s == "true" || s == "false" => {
                        self.bump();
                        Arg::Value(Value::Bool(s == "true"))
                    }
                    Tok::Ident(_) => Arg::Var(self.var_name()?),
                    other => {
                        return self.error(format!(
                            "expected argument, found {}",
                            Self::describe(&other)
                        ))
                    }
                };
                args.push((arg, arg_at));
                if !self.is_sym(",") {
                    break;
                }
                self.bump();
            }
            self.expect_sym(")")?;
        }
        Ok(Raw::Ref {
            name,
            args,
            negated,
            at,
        })
    }
}

struct Resolver<'a> {
    types: &'a BTreeMap<String, EventTypeDecl>,
    equations: &'a BTreeMap<String, Location>,
}

impl Resolver<'_> {
    fn resolve(&self, raw: &Raw, scope: &mut Vec<String>) -> Result<TermRef, ParseError> {
        Ok(match raw {
            Raw::Ref {
                name,
                args,
                negated,
                at,
            } => {
                if let Some(decl) = self.types.get(name) {
                    if decl.params.len() != args.len() {
                        return Err(ParseError::Pattern {
                            at: *at,
                            source: crate::error::PatternError::ArityMismatch {
                                decl: name.clone(),
                                expected: decl.params.len(),
                                found: args.len(),
                            },
                        });
                    }
                    for (arg, arg_at) in args {
                        if let Arg::Var(v) = arg {
                            if !scope.contains(v) {
                                return Err(ParseError::UnboundVariable {
                                    at: *arg_at,
                                    var: v.clone(),
                                });
                            }
                        }
                    }
                    let args = args.iter().map(|(a, _)| a.clone()).collect();
                    if *negated {
                        Term::not_event(name, args)
                    } else {
                        Term::event(name, args)
                    }
                } else if self.equations.contains_key(name) {
                    if !args.is_empty() || *negated {
                        return Err(ParseError::EquationArgs {
                            at: *at,
                            name: name.clone(),
                        });
                    }
                    Term::eq_ref(name)
                } else {
                    return Err(ParseError::UnresolvedName {
                        at: *at,
                        name: name.clone(),
                    });
                }
            }
            Raw::Seq(a, b) => Term::seq(self.resolve(a, scope)?, self.resolve(b, scope)?),
            Raw::Shuffle(a, b) => Term::shuffle(self.resolve(a, scope)?, self.resolve(b, scope)?),
            Raw::And(a, b) => Term::and(self.resolve(a, scope)?, self.resolve(b, scope)?),
            Raw::Or(a, b) => Term::or(self.resolve(a, scope)?, self.resolve(b, scope)?),
            Raw::Star(a) => Term::star(self.resolve(a, scope)?),
            Raw::Let(vars, body) => {
                let depth = scope.len();
                scope.extend(vars.iter().cloned());
                let body = self.resolve(body, scope);
                scope.truncate(depth);
                Term::let_in(vars.clone(), body?)
            }
        })
    }
}

/// Parses a property file into a validated [`Spec`].
pub fn parse(text: &str) -> Result<Spec, ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let mut types: BTreeMap<String, EventTypeDecl> = BTreeMap::new();
    let mut type_locs: BTreeMap<String, Location> = BTreeMap::new();
    let mut raw_equations: Vec<(String, Location, Raw)> = Vec::new();
    let mut main: Option<String> = None;

    while *p.peek() != Tok::Eof {
        if p.is_kw("type") {
            p.bump();
            let (name, at) = p.ident()?;
            let params = if p.is_sym("(") {
                p.bump();
                let params = if p.is_sym(")") {
                    Vec::new()
                } else {
                    p.name_list()?
                };
                p.expect_sym(")")?;
                params
            } else {
                Vec::new()
            };
            p.expect_kw("matches")?;
            let pattern = p.pattern_map()?;
            p.expect_sym(";")?;
            let decl = EventTypeDecl::new(name.clone(), params, pattern)
                .map_err(|source| ParseError::Pattern { at, source })?;
            if types.insert(name.clone(), decl).is_some() {
                return Err(ParseError::Duplicate { at, name });
            }
            type_locs.insert(name, at);
        } else if p.is_kw("main") {
            p.bump();
            let (name, _) = p.ident()?;
            p.expect_sym(";")?;
            main = Some(name);
        } else {
            let (name, at) = p.ident()?;
            if p.is_sym("(") {
                return Err(ParseError::EquationArgs { at, name });
            }
            p.expect_sym("=")?;
            let body = p.term()?;
            p.expect_sym(";")?;
            if raw_equations.iter().any(|(n, _, _)| *n == name) {
                return Err(ParseError::Duplicate { at, name });
            }
            raw_equations.push((name, at, body));
        }
    }

    let equation_locs: BTreeMap<String, Location> = raw_equations
        .iter()
        .map(|(n, at, _)| (n.clone(), *at))
        .collect();
    for (name, at) in &equation_locs {
        if type_locs.contains_key(name) {
            return Err(ParseError::Duplicate {
                at: *at,
                name: name.clone(),
            });
        }
    }
    let resolver = Resolver {
        types: &types,
        equations: &equation_locs,
    };
    let mut equations = BTreeMap::new();
    for (name, _, raw) in &raw_equations {
        equations.insert(name.clone(), resolver.resolve(raw, &mut Vec::new())?);
    }
    let main = match main {
        Some(m) => m,
        None => raw_equations
            .first()
            .map(|(n, _, _)| n.clone())
            .ok_or(ParseError::NoEquations)?,
    };
    Spec::new(types, equations, main)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        type ET1 matches { k: "a" };
        type ET2 matches { k: "b" };
        Main = ET1 Main \/ ET2;
    "#;

    #[test]
    fn guarded_recursion_accepted() {
        let spec = parse(BASIC).unwrap();
        assert_eq!(spec.main(), "Main");
        assert_eq!(spec.equations().len(), 1);
        let body = spec.equation("Main").unwrap();
        assert!(matches!(&**body, Term::Or(_, _)));
    }

    #[test]
    fn singleton_main() {
        let spec = parse("type ET1 matches {}; Main = ET1;").unwrap();
        assert_eq!(
            **spec.equation("Main").unwrap(),
            Term::Event {
                name: "ET1".into(),
                args: vec![],
                negated: false
            }
        );
    }

    #[test]
    fn precedence() {
        // seq binds tighter than |, which binds tighter than /\, then \/
        let spec =
            parse("type a matches {}; type b matches {}; M = a b | a /\\ b \\/ a*;").unwrap();
        let m = spec.equation("M").unwrap();
        let Term::Or(l, r) = &**m else {
            panic!("{m:?}")
        };
        assert!(matches!(&**r, Term::Star(_)));
        let Term::And(al, _) = &**l else { panic!() };
        let Term::Shuffle(sl, _) = &**al else {
            panic!()
        };
        assert!(matches!(&**sl, Term::Seq(_, _)));
    }

    #[test]
    fn block_style_let() {
        let spec = parse("type t(x) matches { v: x }; M = { let x; t(x) t(x) }; ").unwrap();
        assert!(
            matches!(&**spec.equation("M").unwrap(), Term::Let(v, _) if v == &vec!["x".to_string()])
        );
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse("type a matches {};\nM = a \\/ ;").unwrap_err();
        let loc = err.location().unwrap();
        assert_eq!((loc.line, loc.column), (2, 10));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn unresolved_name_reported() {
        let err = parse("type a matches {};\nM = a q;").unwrap_err();
        assert!(
            matches!(err, ParseError::UnresolvedName { ref name, at } if name == "q" && at.line == 2)
        );
    }

    #[test]
    fn arity_and_unbound_vars_rejected() {
        let err = parse("type t(x) matches { v: x }; M = t;").unwrap_err();
        assert!(matches!(err, ParseError::Pattern { .. }));
        let err = parse("type t(x) matches { v: x }; M = t(y);").unwrap_err();
        assert!(matches!(err, ParseError::UnboundVariable { ref var, .. } if var == "y"));
    }

    #[test]
    fn unguarded_rejected() {
        let err = parse("type a matches {}; M = M a \\/ a;").unwrap_err();
        assert!(matches!(err, ParseError::UnguardedRecursion { .. }));
    }

    #[test]
    fn patterns_with_constraints_lists_and_wildcards() {
        let spec = parse(
            r#"type c(x) matches { nlu: { confidence: > 0.6 }, l: [1, -2, _], h: <= x - 2, s: "q\"s", b: true, v: x };
               M = c(3);"#,
        )
        .unwrap();
        let decl = spec.event_type("c").unwrap();
        let Pattern::Map(m) = &decl.pattern else {
            panic!()
        };
        assert_eq!(
            m["h"],
            Pattern::Cmp(
                CmpOp::Le,
                Bound::Var {
                    name: "x".into(),
                    offset: Value::Num(-2.0)
                }
            )
        );
        assert_eq!(
            m["l"],
            Pattern::List(vec![
                Pattern::Lit(1.into()),
                Pattern::Lit((-2).into()),
                Pattern::Any
            ])
        );
        assert_eq!(m["s"], Pattern::Lit("q\"s".into()));
    }

    #[test]
    fn explicit_main() {
        let spec = parse("type a matches {}; A = a; B = a a; main B;").unwrap();
        assert_eq!(spec.main(), "B");
        assert!(matches!(
            parse("type a matches {}; A = a; main C;"),
            Err(ParseError::MissingMain(_))
        ));
    }

    #[test]
    fn duplicates_rejected() {
        assert!(matches!(
            parse("type a matches {}; type a matches {}; M = a;"),
            Err(ParseError::Duplicate { .. })
        ));
        assert!(matches!(
            parse("type a matches {}; a = a;"),
            Err(ParseError::Duplicate { .. })
        ));
        assert!(matches!(
            parse("type a matches { k: 1, k: 2 }; M = a;"),
            Err(ParseError::Duplicate { .. })
        ));
    }
}
