//! Concrete syntax for formulas and weight terms.
//!
//! ```text
//! formula := disj ('implies' formula)?
//! disj    := conj ('or' conj)*
//! conj    := unary ('and' unary)*
//! unary   := 'not' unary | ('exists'|'forall') var (',' var)* '.'? formula | atom
//! atom    := rel '(' std, ... ')' | rel | '(' formula ')' | term cmp term
//! cmp     := '=' | '<' | '>' | '<=' | '>=' | '!='
//! term    := add
//! add     := mul (('+'|'-') mul)*
//! mul     := neg (('*'|'/') neg)*
//! neg     := '-' neg | primary
//! primary := number | 'bot' | w '(' std, ... ')' | w | '(' term ')'
//!          | 'if' formula 'then' term 'else' term
//!          | 'sum' '{' var, ... ':' formula '}' mul
//! ```
//!
//! `=` between two element terms is element equality; anywhere else it compares
//! weight terms. Bound variables are renamed apart.

use std::collections::HashSet;

use super::ast::{Formula, StdTerm, Term};
use crate::rational::Rational;
use crate::structure::{SymbolKind, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} arguments, got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Sym(&'static str),
}

const SYMBOLS: [&str; 17] = [
    "<=", ">=", "!=", "(", ")", "{", "}", ",", ":", ".", "+", "-", "*", "/", "<", ">", "=",
];

const KEYWORDS: [&str; 11] = [
    "exists", "forall", "and", "or", "not", "implies", "if", "then", "else", "sum", "bot",
];

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit = &text[start..i];
            let r = lit.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("bad number `{lit}`"),
            })?;
            out.push((Tok::Num(r), start));
        } else {
            let sym = SYMBOLS
                .iter()
                .find(|s| text[i..].starts_with(**s))
                .ok_or_else(|| ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                })?;
            out.push((Tok::Sym(sym), i));
            i += sym.len();
        }
    }
    Ok(out)
}

/// Intermediate result of the term parser: element terms are only legal as
/// the two sides of an element equality.
enum Expr {
    Std(StdTerm),
    Weight(Term),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vocab: &'a Vocabulary,
    scope: Vec<(String, String)>,
    used: HashSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(text: &str, vocab: &'a Vocabulary) -> PResult<Self> {
        let toks = tokenize(text)?;
        let used = toks
            .iter()
            .filter_map(|(t, _)| match t {
                Tok::Ident(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        Ok(Parser {
            toks,
            pos: 0,
            end: text.len(),
            vocab,
            scope: Vec::new(),
            used,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn variable(&mut self) -> PResult<String> {
        let name = self.ident()?;
        let valid = name.starts_with(|c: char| c.is_ascii_lowercase())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid || self.vocab.kind(&name).is_some() {
            self.pos -= 1;
            return self.err(format!("`{name}` is not a variable name"));
        }
        Ok(name)
    }

    /// Bind a variable, renaming it when an enclosing binder already uses the name.
    fn bind(&mut self, name: String) -> String {
        let renamed = if self.scope.iter().any(|(orig, _)| *orig == name) {
            let mut k = 1;
            loop {
                let candidate = format!("{name}_{k}");
                if !self.used.contains(&candidate) && self.vocab.kind(&candidate).is_none() {
                    break candidate;
                }
                k += 1;
            }
        } else {
            name.clone()
        };
        self.used.insert(renamed.clone());
        self.scope.push((name, renamed.clone()));
        renamed
    }

    fn resolve(&self, name: &str) -> String {
        self.scope
            .iter()
            .rev()
            .find(|(orig, _)| orig == name)
            .map_or_else(|| name.to_string(), |(_, r)| r.clone())
    }

    fn std_term(&mut self) -> PResult<StdTerm> {
        let name = self.ident()?;
        match self.vocab.kind(&name) {
            Some(SymbolKind::Constant) => Ok(StdTerm::Const(name)),
            Some(_) => {
                self.pos -= 1;
                self.err(format!("`{name}` is not an element term"))
            }
            None => {
                self.pos -= 1;
                let v = self.variable()?;
                Ok(StdTerm::Var(self.resolve(&v)))
            }
        }
    }

    fn args(&mut self, symbol: &str, arity: usize) -> PResult<Vec<StdTerm>> {
        let mut args = Vec::new();
        if self.eat_sym("(") {
            if !self.is_sym(")") {
                loop {
                    args.push(self.std_term()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        if args.len() != arity {
            return Err(ParseError::Arity {
                symbol: symbol.to_string(),
                expected: arity,
                got: args.len(),
            });
        }
        Ok(args)
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_kw("implies") {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while self.eat_kw("or") {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.unary()?;
        while self.eat_kw("and") {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, is_exists) in [("exists", true), ("forall", false)] {
            if self.eat_kw(kw) {
                let mut vars = vec![self.variable()?];
                while self.eat_sym(",") {
                    vars.push(self.variable()?);
                }
                self.eat_sym(".");
                let depth = self.scope.len();
                let bound: Vec<String> = vars.into_iter().map(|v| self.bind(v)).collect();
                let mut body = self.formula()?;
                self.scope.truncate(depth);
                for v in bound.into_iter().rev() {
                    body = if is_exists {
                        Formula::Exists(v, Box::new(body))
                    } else {
                        Formula::Forall(v, Box::new(body))
                    };
                }
                return Ok(body);
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        if let Some(Tok::Ident(name)) = self.peek() {
            if let Some(SymbolKind::Relation(k)) = self.vocab.kind(name) {
                let name = name.clone();
                self.pos += 1;
                let args = self.args(&name, k)?;
                return Ok(Formula::Rel { symbol: name, args });
            }
        }
        if self.is_sym("(") {
            let save = self.pos;
            let scope = self.scope.len();
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            self.pos = save;
            self.scope.truncate(scope);
            self.pos += 1;
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["<", ">", "=", "<=", ">=", "!="].contains(s) => *s,
            _ => return self.err("expected comparison operator"),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        if let (Expr::Std(a), Expr::Std(b)) = (&lhs, &rhs) {
            return match op {
                "=" => Ok(Formula::Equal(a.clone(), b.clone())),
                "!=" => Ok(Formula::not(Formula::Equal(a.clone(), b.clone()))),
                _ => self.err("element terms can only be compared with `=` or `!=`"),
            };
        }
        let l = self.weight(lhs)?;
        let r = self.weight(rhs)?;
        Ok(match op {
            "<" => Formula::lt(l, r),
            ">" => Formula::lt(r, l),
            "=" => Formula::weq(l, r),
            "!=" => Formula::not(Formula::weq(l, r)),
            "<=" => Formula::or(Formula::lt(l.clone(), r.clone()), Formula::weq(l, r)),
            ">=" => Formula::or(Formula::lt(r.clone(), l.clone()), Formula::weq(l, r)),
            _ => unreachable!(),
        })
    }

    fn weight(&self, e: Expr) -> PResult<Term> {
        match e {
            Expr::Weight(t) => Ok(t),
            Expr::Std(s) => self.err(format!(
                "element term `{s}` used where a weight term is expected"
            )),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let e = self.expr()?;
        self.weight(e)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.mul()?;
        loop {
            if self.eat_sym("+") {
                let r = self.mul()?;
                e = Expr::Weight(self.weight(e)?.add(self.weight(r)?));
            } else if self.eat_sym("-") {
                let r = self.mul()?;
                e = Expr::Weight(self.weight(e)?.sub(self.weight(r)?));
            } else {
                return Ok(e);
            }
        }
    }

    fn mul(&mut self) -> PResult<Expr> {
        let mut e = self.neg()?;
        loop {
            if self.eat_sym("*") {
                let r = self.neg()?;
                e = Expr::Weight(self.weight(e)?.mul(self.weight(r)?));
            } else if self.eat_sym("/") {
                let r = self.neg()?;
                e = Expr::Weight(self.weight(e)?.div(self.weight(r)?));
            } else {
                return Ok(e);
            }
        }
    }

    fn neg(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            let e = self.neg()?;
            return Ok(Expr::Weight(self.weight(e)?.neg()));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Expr::Weight(Term::constant(r)))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "bot" => {
                    self.pos += 1;
                    Ok(Expr::Weight(Term::Bottom))
                }
                "if" => {
                    self.pos += 1;
                    let cond = self.formula()?;
                    self.expect_kw("then")?;
                    let then = self.term()?;
                    self.expect_kw("else")?;
                    let els = self.term()?;
                    Ok(Expr::Weight(Term::ite(cond, then, els)))
                }
                "sum" => {
                    self.pos += 1;
                    self.expect_sym("{")?;
                    let mut vars = vec![self.variable()?];
                    while self.eat_sym(",") {
                        vars.push(self.variable()?);
                    }
                    self.expect_sym(":")?;
                    let depth = self.scope.len();
                    let bound: Vec<String> = vars.into_iter().map(|v| self.bind(v)).collect();
                    let guard = self.formula()?;
                    self.expect_sym("}")?;
                    let body = self.mul()?;
                    let body = self.weight(body)?;
                    self.scope.truncate(depth);
                    Ok(Expr::Weight(Term::sum(bound, guard, body)))
                }
                _ => match self.vocab.kind(&name) {
                    Some(SymbolKind::Weight(k)) => {
                        self.pos += 1;
                        let args = self.args(&name, k)?;
                        Ok(Expr::Weight(Term::Weight { symbol: name, args }))
                    }
                    Some(SymbolKind::Constant) => {
                        self.pos += 1;
                        Ok(Expr::Std(StdTerm::Const(name)))
                    }
                    Some(SymbolKind::Relation(_)) => {
                        self.err(format!("relation `{name}` used as a term"))
                    }
                    None => {
                        if matches!(self.toks.get(self.pos + 1), Some((Tok::Sym("("), _))) {
                            return Err(ParseError::UnknownSymbol(name));
                        }
                        let v = self.variable()?;
                        Ok(Expr::Std(StdTerm::Var(self.resolve(&v))))
                    }
                },
            },
            _ => self.err("expected a term"),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }
}

pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, vocab)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_term(text: &str, vocab: &Vocabulary) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, vocab)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// Either kind of top-level FO(SUM) expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Formula(Formula),
    Term(Term),
}

/// Parse text as a formula, falling back to a weight term.
pub fn parse_fosum(text: &str, vocab: &Vocabulary) -> Result<Parsed, ParseError> {
    match parse_formula(text, vocab) {
        Ok(f) => Ok(Parsed::Formula(f)),
        Err(fe) => match parse_term(text, vocab) {
            Ok(t) => Ok(Parsed::Term(t)),
            Err(_) => Err(fe),
        },
    }
}
