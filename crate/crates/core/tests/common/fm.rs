//! Fourier–Motzkin decision procedure for closed ordered sentences over a
//! one-hidden-layer net. `F` is replaced by its activation-pattern case split,
//! the matrix is kept in disjunctive normal form and variables are eliminated
//! from the innermost quantifier outwards (`forall` as `not exists not`).

use nnq_core::network::Network;
use nnq_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{activation_patterns, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Op {
    const ALL: [Op; 6] = [Op::Lt, Op::Le, Op::Eq, Op::Ge, Op::Gt, Op::Ne];

    fn negate(self) -> Op {
        match self {
            Op::Lt => Op::Ge,
            Op::Le => Op::Gt,
            Op::Eq => Op::Ne,
            Op::Ge => Op::Lt,
            Op::Gt => Op::Le,
            Op::Ne => Op::Eq,
        }
    }

    fn text(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Eq => "=",
            Op::Ge => ">=",
            Op::Gt => ">",
            Op::Ne => "!=",
        }
    }
}

/// Quantifier-free formula of a generated sentence. Linear atoms compare
/// `c[0] + c[1] x0 + ... ` against zero.
#[derive(Debug, Clone)]
pub enum Form {
    Lin(Vec<Rational>, Op),
    F { args: Vec<usize>, result: usize },
    Not(Box<Form>),
    And(Box<Form>, Box<Form>),
    Or(Box<Form>, Box<Form>),
}

#[derive(Debug, Clone)]
pub struct Sentence {
    /// `true` for exists, `false` for forall; one per variable.
    pub prefix: Vec<bool>,
    pub matrix: Form,
}

fn var(i: usize) -> String {
    format!("x{i}")
}

fn render_form(f: &Form) -> String {
    match f {
        Form::Lin(c, op) => {
            let mut s = format!("({})", c[0]);
            for (i, a) in c[1..].iter().enumerate() {
                if !a.is_zero() {
                    s += &format!(" + ({a})*{}", var(i));
                }
            }
            format!("{s} {} 0", op.text())
        }
        Form::F { args, result } => {
            let a: Vec<String> = args.iter().map(|&i| var(i)).collect();
            format!("F({}) = {}", a.join(", "), var(*result))
        }
        Form::Not(a) => format!("not ({})", render_form(a)),
        Form::And(a, b) => format!("({}) and ({})", render_form(a), render_form(b)),
        Form::Or(a, b) => format!("({}) or ({})", render_form(a), render_form(b)),
    }
}

impl Sentence {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, e) in self.prefix.iter().enumerate() {
            s += if *e { "exists " } else { "forall " };
            s += &var(i);
            s += " . ";
        }
        s + "(" + &render_form(&self.matrix) + ")"
    }
}

/// Random closed ordered sentence with `1..=max_vars` variables and
/// `1..=max_atoms` atoms over an `m`-input function.
pub fn random_sentence(rng: &mut ChaCha8Rng, m: usize, max_vars: usize, max_atoms: usize) -> Sentence {
    let d = rng.gen_range(1..=max_vars);
    let prefix = (0..d).map(|_| rng.gen_bool(0.5)).collect();
    let n_atoms = rng.gen_range(1..=max_atoms);
    let mut atoms: Vec<Form> = (0..n_atoms)
        .map(|_| {
            if d > m && rng.gen_bool(0.5) {
                let result = rng.gen_range(m..d);
                let mut pool: Vec<usize> = (0..result).collect();
                while pool.len() > m {
                    pool.remove(rng.gen_range(0..pool.len()));
                }
                Form::F { args: pool, result }
            } else {
                let mut c = vec![Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=2))];
                loop {
                    let lin: Vec<Rational> = (0..d).map(|_| Rational::from_int(rng.gen_range(-2..=2))).collect();
                    if lin.iter().any(|a| !a.is_zero()) {
                        c.extend(lin);
                        break;
                    }
                }
                Form::Lin(c, Op::ALL[rng.gen_range(0..6)])
            }
        })
        .collect();
    while atoms.len() > 1 {
        let a = atoms.remove(rng.gen_range(0..atoms.len()));
        let b = atoms.remove(rng.gen_range(0..atoms.len()));
        let mut c = if rng.gen_bool(0.5) {
            Form::And(Box::new(a), Box::new(b))
        } else {
            Form::Or(Box::new(a), Box::new(b))
        };
        if rng.gen_bool(0.25) {
            c = Form::Not(Box::new(c));
        }
        atoms.push(c);
    }
    let mut matrix = atoms.pop().unwrap();
    if rng.gen_bool(0.25) {
        matrix = Form::Not(Box::new(matrix));
    }
    Sentence { prefix, matrix }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Rel {
    Gt,
    Ge,
    Eq,
}

/// `c[0] + sum c[i+1] x_i  rel  0`.
type Lit = (Vec<Rational>, Rel);
type Conj = Vec<Lit>;
type Dnf = Vec<Conj>;

fn normalize_lit((c, rel): Lit) -> Lit {
    let lead = c[1..].iter().find(|a| !a.is_zero()).or_else(|| Some(&c[0]).filter(|a| !a.is_zero()));
    match lead {
        Some(l) => {
            let s = l.abs();
            let mut c: Vec<Rational> = c.iter().map(|a| a / &s).collect();
            // An equation is insensitive to sign.
            if rel == Rel::Eq && c[1..].iter().find(|a| !a.is_zero()).is_some_and(|a| a.is_negative()) {
                c = c.iter().map(|a| -a).collect();
            }
            (c, rel)
        }
        None => (c, rel),
    }
}

/// `Some(truth)` for a literal without variables.
fn constant_truth((c, rel): &Lit) -> Option<bool> {
    if c[1..].iter().any(|a| !a.is_zero()) {
        return None;
    }
    Some(match rel {
        Rel::Gt => c[0].is_positive(),
        Rel::Ge => !c[0].is_negative(),
        Rel::Eq => c[0].is_zero(),
    })
}

/// Drop true constant literals and duplicates; `None` if a literal is false.
fn simplify(conj: Conj) -> Option<Conj> {
    let mut out: Conj = Vec::new();
    for l in conj {
        let l = normalize_lit(l);
        match constant_truth(&l) {
            Some(true) => {}
            Some(false) => return None,
            None => {
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    out.sort();
    Some(out)
}

fn combine(a: &[Rational], sa: &Rational, b: &[Rational], sb: &Rational) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x * sa + y * sb).collect()
}

/// Eliminate variable `k` from a conjunction.
fn eliminate(conj: Conj, k: usize) -> Option<Conj> {
    let j = k + 1;
    if let Some(pos) = conj.iter().position(|(c, rel)| *rel == Rel::Eq && !c[j].is_zero()) {
        let (e, _) = conj[pos].clone();
        let out = conj
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, (c, rel))| {
                let t = -(&c[j] / &e[j]);
                (combine(&c, &Rational::one(), &e, &t), rel)
            })
            .collect();
        return simplify(out);
    }
    let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for (c, rel) in conj {
        if c[j].is_positive() {
            lower.push((c, rel));
        } else if c[j].is_negative() {
            upper.push((c, rel));
        } else {
            rest.push((c, rel));
        }
    }
    for (lc, lr) in &lower {
        for (uc, ur) in &upper {
            let c = combine(lc, &lc[j].recip(), uc, &(-&uc[j]).recip());
            let rel = if *lr == Rel::Gt || *ur == Rel::Gt { Rel::Gt } else { Rel::Ge };
            rest.push((c, rel));
        }
    }
    simplify(rest)
}

fn feasible(conj: &Conj, vars: usize) -> bool {
    let mut c = Some(conj.clone());
    for k in (0..vars).rev() {
        c = match c {
            Some(c) => eliminate(c, k),
            None => return false,
        };
    }
    c.is_some()
}

fn product(a: Dnf, b: Dnf, vars: usize) -> Dnf {
    let mut out = Vec::new();
    for x in &a {
        for y in &b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            if let Some(c) = simplify(c) {
                if feasible(&c, vars) && !out.contains(&c) {
                    out.push(c);
                }
            }
        }
    }
    out
}

fn union(mut a: Dnf, b: Dnf) -> Dnf {
    for c in b {
        if !a.contains(&c) {
            a.push(c);
        }
    }
    a
}

fn neg_lit((c, rel): &Lit) -> Dnf {
    let n: Vec<Rational> = c.iter().map(|a| -a).collect();
    match rel {
        Rel::Gt => vec![vec![(n, Rel::Ge)]],
        Rel::Ge => vec![vec![(n, Rel::Gt)]],
        Rel::Eq => vec![vec![(c.clone(), Rel::Gt)], vec![(n, Rel::Gt)]],
    }
}

fn negate(d: &Dnf, vars: usize) -> Dnf {
    let mut acc: Dnf = vec![vec![]];
    for conj in d {
        let alt = conj.iter().fold(Vec::new(), |u, l| union(u, neg_lit(l)));
        acc = product(acc, alt, vars);
    }
    acc
}

fn lit_dnf(c: Vec<Rational>, op: Op) -> Dnf {
    let n: Vec<Rational> = c.iter().map(|a| -a).collect();
    match op {
        Op::Gt => vec![vec![(c, Rel::Gt)]],
        Op::Ge => vec![vec![(c, Rel::Ge)]],
        Op::Eq => vec![vec![(c, Rel::Eq)]],
        Op::Lt => vec![vec![(n, Rel::Gt)]],
        Op::Le => vec![vec![(n, Rel::Ge)]],
        Op::Ne => vec![vec![(c, Rel::Gt)], vec![(n, Rel::Gt)]],
    }
}

fn f_dnf(pats: &[Pattern], args: &[usize], result: usize, vars: usize, positive: bool) -> Dnf {
    let place = |coeffs: &[Rational], constant: &Rational| {
        let mut c = vec![Rational::zero(); vars + 1];
        c[0] = constant.clone();
        for (a, &i) in coeffs.iter().zip(args) {
            c[i + 1] = &c[i + 1] + a;
        }
        c
    };
    let mut out = Vec::new();
    for p in pats {
        let region: Conj = p
            .region
            .iter()
            .map(|(coeffs, k, strict)| (place(coeffs, k), if *strict { Rel::Gt } else { Rel::Ge }))
            .collect();
        let mut graph = place(&p.output.0, &p.output.1);
        graph[result + 1] = &graph[result + 1] - &Rational::one();
        let tail = if positive { lit_dnf(graph, Op::Eq) } else { lit_dnf(graph, Op::Ne) };
        out = union(out, product(vec![region], tail, vars));
    }
    out
}

fn to_dnf(f: &Form, pats: &[Pattern], vars: usize, positive: bool) -> Dnf {
    match f {
        Form::Lin(c, op) => {
            let op = if positive { *op } else { op.negate() };
            lit_dnf(c.clone(), op)
                .into_iter()
                .filter_map(simplify)
                .collect()
        }
        Form::F { args, result } => f_dnf(pats, args, *result, vars, positive),
        Form::Not(a) => to_dnf(a, pats, vars, !positive),
        Form::And(a, b) | Form::Or(a, b) => {
            let (x, y) = (to_dnf(a, pats, vars, positive), to_dnf(b, pats, vars, positive));
            if matches!(f, Form::And(..)) == positive {
                product(x, y, vars)
            } else {
                union(x, y)
            }
        }
    }
}

fn exists(d: Dnf, k: usize) -> Dnf {
    let mut out = Vec::new();
    for c in d {
        if let Some(c) = eliminate(c, k) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Truth of `s` with `F` the function of a one-hidden-layer `net`.
///
/// Consecutive quantifiers of one kind are eliminated as a block. The DNF
/// holds the current formula when `positive`, and its negation otherwise, so
/// a `forall` block only costs a negation when the kind changes.
pub fn decide(net: &Network, s: &Sentence) -> bool {
    let pats = activation_patterns(net);
    let vars = s.prefix.len();
    let mut positive = s.prefix.last().copied().unwrap_or(true);
    let mut d = to_dnf(&s.matrix, &pats, vars, positive);
    for (k, &ex) in s.prefix.iter().enumerate().rev() {
        if ex != positive {
            d = negate(&d, vars);
            positive = ex;
        }
        d = exists(d, k);
    }
    d.is_empty() != positive
}

/// Whether some point of `R^dim` has the given signs (`-1`, `0`, `1`) against
/// the affine maps `c[0] + c[1] x0 + ...`.
pub fn sign_vector_feasible(dim: usize, planes: &[Vec<Rational>], signs: &[i8]) -> bool {
    let conj: Conj = planes
        .iter()
        .zip(signs)
        .map(|(c, s)| match s {
            1 => (c.clone(), Rel::Gt),
            -1 => (c.iter().map(|a| -a).collect(), Rel::Gt),
            _ => (c.clone(), Rel::Eq),
        })
        .collect();
    simplify(conj).is_some_and(|c| feasible(&c, dim))
}
