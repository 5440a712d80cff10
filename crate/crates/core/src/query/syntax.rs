//! Query syntax: linear real arithmetic with a network function symbol `F`.

use std::fmt;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    F(Vec<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    DistLinf(Vec<Expr>, Vec<Expr>),
    DistL1(Vec<Expr>, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpRel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CmpRel {
    pub fn negate(self) -> CmpRel {
        match self {
            CmpRel::Lt => CmpRel::Ge,
            CmpRel::Le => CmpRel::Gt,
            CmpRel::Eq => CmpRel::Ne,
            CmpRel::Ge => CmpRel::Lt,
            CmpRel::Gt => CmpRel::Le,
            CmpRel::Ne => CmpRel::Eq,
        }
    }

    /// The relation with its operands swapped.
    pub fn swap(self) -> CmpRel {
        match self {
            CmpRel::Lt => CmpRel::Gt,
            CmpRel::Le => CmpRel::Ge,
            CmpRel::Ge => CmpRel::Le,
            CmpRel::Gt => CmpRel::Lt,
            r => r,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpRel::Lt => "<",
            CmpRel::Le => "<=",
            CmpRel::Eq => "=",
            CmpRel::Ge => ">=",
            CmpRel::Gt => ">",
            CmpRel::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryAst {
    True,
    False,
    Cmp(Expr, CmpRel, Expr),
    Not(Box<QueryAst>),
    And(Box<QueryAst>, Box<QueryAst>),
    Or(Box<QueryAst>, Box<QueryAst>),
    Implies(Box<QueryAst>, Box<QueryAst>),
    Exists(String, Box<QueryAst>),
    Forall(String, Box<QueryAst>),
}

impl QueryAst {
    pub fn cmp(a: Expr, r: CmpRel, b: Expr) -> Self {
        QueryAst::Cmp(a, r, b)
    }

    pub fn and(a: QueryAst, b: QueryAst) -> Self {
        QueryAst::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: QueryAst, b: QueryAst) -> Self {
        QueryAst::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: QueryAst) -> Self {
        QueryAst::Not(Box::new(a))
    }

    pub fn implies(a: QueryAst, b: QueryAst) -> Self {
        QueryAst::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, a: QueryAst) -> Self {
        QueryAst::Exists(v.to_string(), Box::new(a))
    }

    pub fn forall(v: &str, a: QueryAst) -> Self {
        QueryAst::Forall(v.to_string(), Box::new(a))
    }

    /// True when some comparison mentions `F`.
    pub fn uses_f(&self) -> bool {
        match self {
            QueryAst::True | QueryAst::False => false,
            QueryAst::Cmp(a, _, b) => a.uses_f() || b.uses_f(),
            QueryAst::Not(a) | QueryAst::Exists(_, a) | QueryAst::Forall(_, a) => a.uses_f(),
            QueryAst::And(a, b) | QueryAst::Or(a, b) | QueryAst::Implies(a, b) => {
                a.uses_f() || b.uses_f()
            }
        }
    }
}

impl Expr {
    pub fn var(v: &str) -> Self {
        Expr::Var(v.to_string())
    }

    pub fn constant(c: Rational) -> Self {
        Expr::Const(c)
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn uses_f(&self) -> bool {
        self.any(&|e| matches!(e, Expr::F(_)))
    }

    /// True when `pred` holds for this node or a descendant.
    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self)
            || match self {
                Expr::Const(_) | Expr::Var(_) => false,
                Expr::Neg(a) | Expr::Abs(a) => a.any(pred),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Min(a, b)
                | Expr::Max(a, b) => a.any(pred) || b.any(pred),
                Expr::F(args) => args.iter().any(|a| a.any(pred)),
                Expr::DistLinf(a, b) | Expr::DistL1(a, b) => a.iter().chain(b).any(|e| e.any(pred)),
            }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[Expr]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_negative() {
                    write!(f, "(0 - {})", c.abs())
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::F(args) => {
                write!(f, "F(")?;
                write_list(f, args)?;
                write!(f, ")")
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::DistLinf(a, b) | Expr::DistL1(a, b) => {
                let name = if matches!(self, Expr::DistLinf(..)) {
                    "dist_linf"
                } else {
                    "dist_l1"
                };
                write!(f, "{name}([")?;
                write_list(f, a)?;
                write!(f, "], [")?;
                write_list(f, b)?;
                write!(f, "])")
            }
        }
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryAst::True => write!(f, "true"),
            QueryAst::False => write!(f, "false"),
            QueryAst::Cmp(a, r, b) => write!(f, "{a} {} {b}", r.symbol()),
            QueryAst::Not(a) => write!(f, "not ({a})"),
            QueryAst::And(a, b) => write!(f, "({a}) and ({b})"),
            QueryAst::Or(a, b) => write!(f, "({a}) or ({b})"),
            QueryAst::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            QueryAst::Exists(v, a) => write!(f, "exists {v} . ({a})"),
            QueryAst::Forall(v, a) => write!(f, "forall {v} . ({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("F expects {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Sym(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, QueryParseError> {
    const SYMS: [&str; 16] = [
        "->", "<=", ">=", "!=", "<", ">", "=", "(", ")", "[", "]", ",", ".", "+", "-", "*",
    ];
    let mut out = Vec::new();
    let b = text.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(text[s..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                // A dot not followed by a digit is a quantifier dot.
                if b[i] == b'.' && !(i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
                    break;
                }
                i += 1;
            }
            let lit: Rational = text[s..i].parse().map_err(|_| QueryParseError::Syntax {
                pos: s,
                msg: format!("bad number `{}`", &text[s..i]),
            })?;
            out.push((s, Tok::Num(lit)));
            continue;
        }
        if c == b'/' {
            out.push((i, Tok::Sym("/")));
            i += 1;
            continue;
        }
        match SYMS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push((i, Tok::Sym(s)));
                i += s.len();
            }
            None => {
                return Err(QueryParseError::Syntax {
                    pos: i,
                    msg: format!(
                        "unexpected character `{}`",
                        text[i..].chars().next().unwrap()
                    ),
                })
            }
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 14] = [
    "exists",
    "forall",
    "and",
    "or",
    "not",
    "implies",
    "true",
    "false",
    "F",
    "abs",
    "min",
    "max",
    "dist_linf",
    "dist_l1",
];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    arity: usize,
}

type PResult<T> = Result<T, QueryParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(QueryParseError::Syntax {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn variable(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn formula(&mut self) -> PResult<QueryAst> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") || self.eat_kw("implies") {
            let rhs = self.formula()?;
            return Ok(QueryAst::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<QueryAst> {
        let mut f = self.conjunction()?;
        while self.eat_kw("or") {
            f = QueryAst::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<QueryAst> {
        let mut f = self.unary()?;
        while self.eat_kw("and") {
            f = QueryAst::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<QueryAst> {
        if self.eat_kw("not") {
            return Ok(QueryAst::not(self.unary()?));
        }
        for (kw, exists) in [("exists", true), ("forall", false)] {
            if self.eat_kw(kw) {
                let mut vars = vec![self.variable()?];
                while self.eat_sym(",") {
                    vars.push(self.variable()?);
                }
                self.eat_sym(".");
                let mut body = self.formula()?;
                for v in vars.iter().rev() {
                    body = if exists {
                        QueryAst::exists(v, body)
                    } else {
                        QueryAst::forall(v, body)
                    };
                }
                return Ok(body);
            }
        }
        if self.eat_kw("true") {
            return Ok(QueryAst::True);
        }
        if self.eat_kw("false") {
            return Ok(QueryAst::False);
        }
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(c) = self.comparison() {
                return Ok(c);
            }
            self.pos = save;
            self.expect_sym("(")?;
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<QueryAst> {
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Some(Tok::Sym("<")) => CmpRel::Lt,
            Some(Tok::Sym("<=")) => CmpRel::Le,
            Some(Tok::Sym("=")) => CmpRel::Eq,
            Some(Tok::Sym(">=")) => CmpRel::Ge,
            Some(Tok::Sym(">")) => CmpRel::Gt,
            Some(Tok::Sym("!=")) => CmpRel::Ne,
            _ => return self.err("expected a comparison operator"),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(QueryAst::Cmp(lhs, rel, rhs))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.product()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat_sym("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut e = self.factor()?;
        loop {
            if self.eat_sym("*") {
                e = Expr::Mul(Box::new(e), Box::new(self.factor()?));
            } else if self.eat_sym("/") {
                e = Expr::Div(Box::new(e), Box::new(self.factor()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    /// A vector argument: `[e1, ..., ek]` or a single expression.
    fn vector(&mut self) -> PResult<Vec<Expr>> {
        if self.eat_sym("[") {
            let mut out = vec![self.expr()?];
            while self.eat_sym(",") {
                out.push(self.expr()?);
            }
            self.expect_sym("]")?;
            Ok(out)
        } else {
            Ok(vec![self.expr()?])
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "F" => {
                    self.pos += 1;
                    let args = self.args()?;
                    if args.len() != self.arity {
                        return Err(QueryParseError::Arity {
                            expected: self.arity,
                            got: args.len(),
                        });
                    }
                    Ok(Expr::F(args))
                }
                "abs" => {
                    self.pos += 1;
                    let mut a = self.args()?;
                    if a.len() != 1 {
                        return self.err("abs takes one argument");
                    }
                    Ok(Expr::Abs(Box::new(a.remove(0))))
                }
                "min" | "max" => {
                    self.pos += 1;
                    let a = self.args()?;
                    if a.len() < 2 {
                        return self.err(format!("{name} takes at least two arguments"));
                    }
                    let fold = |x: Expr, y: Expr| {
                        if name == "min" {
                            Expr::Min(Box::new(x), Box::new(y))
                        } else {
                            Expr::Max(Box::new(x), Box::new(y))
                        }
                    };
                    let mut it = a.into_iter();
                    let first = it.next().unwrap();
                    Ok(it.fold(first, fold))
                }
                "dist_linf" | "dist_l1" => {
                    self.pos += 1;
                    self.expect_sym("(")?;
                    let a = self.vector()?;
                    self.expect_sym(",")?;
                    let b = self.vector()?;
                    self.expect_sym(")")?;
                    if a.len() != b.len() {
                        return self.err("distance arguments differ in length");
                    }
                    Ok(if name == "dist_linf" {
                        Expr::DistLinf(a, b)
                    } else {
                        Expr::DistL1(a, b)
                    })
                }
                _ => Ok(Expr::Var(self.variable()?)),
            },
            _ => self.err("expected an expression"),
        }
    }
}

/// Parse a query whose function symbol `F` takes `m` arguments.
pub fn parse_query(text: &str, m: usize) -> Result<QueryAst, QueryParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        arity: m,
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}
