//! SMT-LIB v2 scripts in QF_NRA to clauses.

use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use super::cnf::{CnfBuilder, Formula};
use super::sexpr::{read_all, SExpr};
use super::{Atom, BoolVar, CmpKind, Literal, Problem};
use crate::numeric::{parse_rational, Rational};
use crate::poly::{Polynomial, RealVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error on line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("malformed command: {0}")]
    Malformed(String),
    #[error("input exceeds limit on {0}")]
    Limit(&'static str),
}

/// Resource caps protecting the parser from hostile input.
#[derive(Clone, Copy, Debug)]
pub struct ParseLimits {
    pub max_depth: usize,
    pub max_degree: u32,
    pub max_terms: usize,
    pub max_clauses: usize,
    /// Distribute a disjunction only while the clause product stays within
    /// this multiple of the clause sum.
    pub blowup: usize,
}

impl Default for ParseLimits {
    fn default() -> Self {
        ParseLimits {
            max_depth: 400,
            max_degree: 64,
            max_terms: 20_000,
            max_clauses: 200_000,
            blowup: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Real,
    Bool,
}

/// A parsed script: the clause set plus the raw declarations and assertions
/// for independent re-evaluation.
#[derive(Clone, Debug, Default)]
pub struct Script {
    pub problem: Problem,
    pub logic: Option<String>,
    pub declarations: Vec<(String, Sort)>,
    pub definitions: Vec<(String, Sort, SExpr)>,
    pub assertions: Vec<SExpr>,
    pub get_model: bool,
}

#[derive(Clone, Debug)]
enum Term {
    Bool(Formula),
    Real(Polynomial),
}

#[derive(Clone, Copy, Debug)]
enum Sym {
    Real(RealVar),
    Bool(BoolVar),
}

struct Translator<'a> {
    limits: ParseLimits,
    globals: HashMap<String, Sym>,
    macros: HashMap<String, Term>,
    scopes: Vec<HashMap<String, Term>>,
    problem: &'a mut Problem,
    side: Vec<Formula>,
    helpers: Vec<RealVar>,
}

pub fn parse_smt2(text: &str) -> Result<Script, ParseError> {
    parse_smt2_with(text, ParseLimits::default())
}

pub fn parse_smt2_with(text: &str, limits: ParseLimits) -> Result<Script, ParseError> {
    let exprs = read_all(text, limits.max_depth)?;
    let mut script = Script::default();
    let mut problem = Problem::default();
    let mut formulas = Vec::new();
    let helpers;
    {
        let mut tr = Translator {
            limits,
            globals: HashMap::new(),
            macros: HashMap::new(),
            scopes: Vec::new(),
            problem: &mut problem,
            side: Vec::new(),
            helpers: Vec::new(),
        };
        for e in &exprs {
            let items = e
                .as_list()
                .ok_or_else(|| ParseError::Malformed(format!("expected a command, found `{e}`")))?;
            let cmd = items
                .first()
                .and_then(SExpr::as_symbol)
                .ok_or_else(|| ParseError::Malformed(e.to_string()))?;
            match cmd {
                "set-logic" => {
                    let logic = items
                        .get(1)
                        .and_then(SExpr::as_symbol)
                        .ok_or_else(|| ParseError::Malformed(e.to_string()))?;
                    if !matches!(logic, "QF_NRA" | "QF_LRA" | "QF_RDL" | "QF_NIRA" | "ALL") {
                        return Err(ParseError::Unsupported(format!("logic {logic}")));
                    }
                    script.logic = Some(logic.to_string());
                }
                "set-info" | "set-option" | "get-info" | "get-option" | "echo" | "get-value"
                | "get-assignment" => {}
                "declare-fun" | "declare-const" => {
                    let (name, sort) = match (cmd, items) {
                        ("declare-fun", [_, SExpr::Symbol(n), SExpr::List(args), sort]) => {
                            if !args.is_empty() {
                                return Err(ParseError::Unsupported(format!(
                                    "function symbol `{n}` with arguments"
                                )));
                            }
                            (n, sort)
                        }
                        ("declare-const", [_, SExpr::Symbol(n), sort]) => (n, sort),
                        _ => return Err(ParseError::Malformed(e.to_string())),
                    };
                    let sort = parse_sort(sort)?;
                    tr.declare(name, sort)?;
                    script.declarations.push((name.clone(), sort));
                }
                "define-fun" => {
                    let [_, SExpr::Symbol(name), SExpr::List(args), sort, body] = items else {
                        return Err(ParseError::Malformed(e.to_string()));
                    };
                    if !args.is_empty() {
                        return Err(ParseError::Unsupported(format!(
                            "define-fun `{name}` with parameters"
                        )));
                    }
                    if tr.globals.contains_key(name) || tr.macros.contains_key(name) {
                        return Err(ParseError::Malformed(format!("`{name}` declared twice")));
                    }
                    let sort = parse_sort(sort)?;
                    let t = tr.term(body)?;
                    check_sort(&t, sort, name)?;
                    tr.macros.insert(name.clone(), t);
                    script.definitions.push((name.clone(), sort, body.clone()));
                }
                "assert" => {
                    let [_, body] = items else {
                        return Err(ParseError::Malformed(e.to_string()));
                    };
                    let f = tr.formula(body)?;
                    formulas.push(f);
                    script.assertions.push(body.clone());
                }
                "check-sat" => {}
                "get-model" => script.get_model = true,
                "exit" => break,
                other => return Err(ParseError::Unsupported(format!("command {other}"))),
            }
        }
        formulas.append(&mut tr.side);
        helpers = std::mem::take(&mut tr.helpers);
    }
    problem.num_user_bools = problem.num_bools();
    problem.num_user_reals = problem.num_reals() - helpers.len();
    let mut builder = CnfBuilder {
        problem: &mut problem,
        blowup: limits.blowup,
        max_clauses: limits.max_clauses,
    };
    for f in formulas {
        builder.add(f)?;
    }
    move_helpers_last(&mut problem, &helpers);
    script.problem = problem;
    Ok(script)
}

/// Renumbers reals so helper variables follow every declared one.
fn move_helpers_last(problem: &mut Problem, helpers: &[RealVar]) {
    let n = problem.real_names.len();
    let is_helper = |i: usize| helpers.contains(&RealVar(i as u32));
    let order: Vec<usize> = (0..n)
        .filter(|&i| !is_helper(i))
        .chain((0..n).filter(|&i| is_helper(i)))
        .collect();
    if order.iter().enumerate().all(|(a, &b)| a == b) {
        return;
    }
    let mut new_id = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new as u32;
    }
    problem.real_names = order
        .iter()
        .map(|&i| problem.real_names[i].clone())
        .collect();
    for c in &mut problem.clauses {
        for l in &mut c.literals {
            if let Atom::Cmp { poly, .. } = &mut l.atom {
                *poly = poly.rename(&|v| RealVar(new_id[v.index()]));
            }
        }
    }
}

fn parse_sort(e: &SExpr) -> Result<Sort, ParseError> {
    match e.as_symbol() {
        Some("Real") => Ok(Sort::Real),
        Some("Bool") => Ok(Sort::Bool),
        _ => Err(ParseError::Unsupported(format!("sort {e}"))),
    }
}

fn check_sort(t: &Term, sort: Sort, what: &str) -> Result<(), ParseError> {
    match (t, sort) {
        (Term::Bool(_), Sort::Bool) | (Term::Real(_), Sort::Real) => Ok(()),
        _ => Err(ParseError::Sort(format!("`{what}` has the wrong sort"))),
    }
}

impl Translator<'_> {
    fn declare(&mut self, name: &str, sort: Sort) -> Result<(), ParseError> {
        if self.globals.contains_key(name) || self.macros.contains_key(name) {
            return Err(ParseError::Malformed(format!("`{name}` declared twice")));
        }
        let sym = match sort {
            Sort::Real => {
                let x = RealVar(self.problem.real_names.len() as u32);
                self.problem.real_names.push(name.to_string());
                Sym::Real(x)
            }
            Sort::Bool => {
                let b = BoolVar(self.problem.bool_names.len() as u32);
                self.problem.bool_names.push(name.to_string());
                Sym::Bool(b)
            }
        };
        self.globals.insert(name.to_string(), sym);
        Ok(())
    }

    fn formula(&mut self, e: &SExpr) -> Result<Formula, ParseError> {
        match self.term(e)? {
            Term::Bool(f) => Ok(f),
            Term::Real(_) => Err(ParseError::Sort(format!("expected a formula, found `{e}`"))),
        }
    }

    fn poly(&mut self, e: &SExpr) -> Result<Polynomial, ParseError> {
        match self.term(e)? {
            Term::Real(p) => Ok(p),
            Term::Bool(_) => Err(ParseError::Sort(format!(
                "expected a real term, found `{e}`"
            ))),
        }
    }

    fn checked(&self, f: Formula) -> Result<Term, ParseError> {
        if f.depth() as usize > 4 * self.limits.max_depth {
            return Err(ParseError::Limit("formula depth"));
        }
        Ok(Term::Bool(f))
    }

    fn checked_poly(&self, p: Polynomial) -> Result<Term, ParseError> {
        if p.num_terms() > self.limits.max_terms {
            return Err(ParseError::Limit("polynomial size"));
        }
        Ok(Term::Real(p))
    }

    fn lookup(&self, name: &str) -> Result<Term, ParseError> {
        for scope in self.scopes.iter().rev() {
            if let Some(t) = scope.get(name) {
                return Ok(t.clone());
            }
        }
        if let Some(t) = self.macros.get(name) {
            return Ok(t.clone());
        }
        match self.globals.get(name) {
            Some(Sym::Real(x)) => Ok(Term::Real(Polynomial::var(*x))),
            Some(Sym::Bool(b)) => Ok(Term::Bool(Formula::Lit(Literal::pos(Atom::Bool(*b))))),
            None => match name {
                "true" => Ok(Term::Bool(Formula::Const(true))),
                "false" => Ok(Term::Bool(Formula::Const(false))),
                _ => Err(ParseError::Undeclared(name.to_string())),
            },
        }
    }

    fn term(&mut self, e: &SExpr) -> Result<Term, ParseError> {
        match e {
            SExpr::Symbol(s) => self.lookup(s),
            SExpr::Number(n) => {
                let r = parse_rational(n)
                    .map_err(|_| ParseError::Malformed(format!("numeral `{n}`")))?;
                Ok(Term::Real(Polynomial::constant(r)))
            }
            SExpr::Str(_) => Err(ParseError::Unsupported("string literal".into())),
            SExpr::List(items) => {
                let Some((head, args)) = items.split_first() else {
                    return Err(ParseError::Malformed("empty application".into()));
                };
                let op = match head {
                    SExpr::Symbol(s) => s.as_str(),
                    SExpr::List(l) if l.first().and_then(SExpr::as_symbol) == Some("_") => {
                        return Err(ParseError::Unsupported(format!(
                            "indexed identifier {head}"
                        )))
                    }
                    _ => {
                        return Err(ParseError::Malformed(format!(
                            "bad application head `{head}`"
                        )))
                    }
                };
                self.apply(op, args, e)
            }
        }
    }

    fn apply(&mut self, op: &str, args: &[SExpr], whole: &SExpr) -> Result<Term, ParseError> {
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() < n {
                Err(ParseError::Malformed(format!(
                    "`{op}` needs at least {n} arguments in `{whole}`"
                )))
            } else {
                Ok(())
            }
        };
        match op {
            "!" => {
                arity(1)?;
                self.term(&args[0])
            }
            "let" => {
                arity(2)?;
                let binds = args[0]
                    .as_list()
                    .ok_or_else(|| ParseError::Malformed(format!("let bindings in `{whole}`")))?;
                let mut scope = HashMap::new();
                for b in binds {
                    let [SExpr::Symbol(name), value] = b.as_list().unwrap_or(&[]) else {
                        return Err(ParseError::Malformed(format!("let binding `{b}`")));
                    };
                    let t = self.term(value)?;
                    scope.insert(name.clone(), t);
                }
                self.scopes.push(scope);
                let r = self.term(&args[1]);
                self.scopes.pop();
                r
            }
            "forall" | "exists" => Err(ParseError::Unsupported("quantifier".into())),
            "not" => {
                if args.len() != 1 {
                    return Err(ParseError::Malformed(format!(
                        "`not` takes one argument in `{whole}`"
                    )));
                }
                let f = self.formula(&args[0])?;
                self.checked(Formula::not(f))
            }
            "and" | "or" => {
                let mut fs = Vec::with_capacity(args.len());
                for a in args {
                    fs.push(self.formula(a)?);
                }
                self.checked(if op == "and" {
                    Formula::and(fs)
                } else {
                    Formula::or(fs)
                })
            }
            "=>" => {
                arity(2)?;
                let mut fs = Vec::with_capacity(args.len());
                for a in args {
                    fs.push(self.formula(a)?);
                }
                let mut acc = fs.pop().unwrap();
                while let Some(prem) = fs.pop() {
                    acc = Formula::implies(prem, acc);
                }
                self.checked(acc)
            }
            "xor" => {
                arity(2)?;
                let mut acc = self.formula(&args[0])?;
                for a in &args[1..] {
                    let f = self.formula(a)?;
                    acc = Formula::not(Formula::iff(acc, f));
                }
                self.checked(acc)
            }
            "ite" => {
                if args.len() != 3 {
                    return Err(ParseError::Malformed(format!(
                        "`ite` takes three arguments in `{whole}`"
                    )));
                }
                let c = self.formula(&args[0])?;
                let a = self.term(&args[1])?;
                let b = self.term(&args[2])?;
                match (a, b) {
                    (Term::Bool(a), Term::Bool(b)) => self.checked(Formula::or(vec![
                        Formula::and(vec![c.clone(), a]),
                        Formula::and(vec![Formula::not(c), b]),
                    ])),
                    (Term::Real(a), Term::Real(b)) => {
                        if let Formula::Const(v) = c {
                            return Ok(Term::Real(if v { a } else { b }));
                        }
                        if !a.is_constant() || !b.is_constant() {
                            return Err(ParseError::Unsupported(
                                "ite over Real with non-constant branches".into(),
                            ));
                        }
                        let v = self.problem.fresh_real("ite!");
                        self.helpers.push(v);
                        let pv = Polynomial::var(v);
                        let eq_a = cmp_formula(pv.sub(&a), CmpKind::Eq);
                        let eq_b = cmp_formula(pv.sub(&b), CmpKind::Eq);
                        self.side.push(Formula::implies(c.clone(), eq_a));
                        self.side.push(Formula::or(vec![c, eq_b]));
                        Ok(Term::Real(pv))
                    }
                    _ => Err(ParseError::Sort(format!(
                        "ite branches differ in `{whole}`"
                    ))),
                }
            }
            "=" | "distinct" => {
                arity(2)?;
                let mut ts = Vec::with_capacity(args.len());
                for a in args {
                    ts.push(self.term(a)?);
                }
                let pairs: Vec<(usize, usize)> = if op == "=" {
                    (1..ts.len()).map(|i| (i - 1, i)).collect()
                } else {
                    (0..ts.len())
                        .flat_map(|i| (i + 1..ts.len()).map(move |j| (i, j)))
                        .collect()
                };
                let mut parts = Vec::with_capacity(pairs.len());
                for (i, j) in pairs {
                    let eq = match (&ts[i], &ts[j]) {
                        (Term::Real(a), Term::Real(b)) => cmp_formula(a.sub(b), CmpKind::Eq),
                        (Term::Bool(a), Term::Bool(b)) => Formula::iff(a.clone(), b.clone()),
                        _ => return Err(ParseError::Sort(format!("mixed sorts in `{whole}`"))),
                    };
                    parts.push(if op == "=" { eq } else { Formula::not(eq) });
                }
                self.checked(Formula::and(parts))
            }
            "<=" | ">=" | "<" | ">" => {
                arity(2)?;
                let mut ps = Vec::with_capacity(args.len());
                for a in args {
                    ps.push(self.poly(a)?);
                }
                let mut parts = Vec::with_capacity(ps.len() - 1);
                for w in ps.windows(2) {
                    let d = w[0].sub(&w[1]);
                    parts.push(match op {
                        "<=" => cmp_formula(d, CmpKind::Le),
                        ">=" => cmp_formula(d, CmpKind::Ge),
                        "<" => Formula::not(cmp_formula(d, CmpKind::Ge)),
                        _ => Formula::not(cmp_formula(d, CmpKind::Le)),
                    });
                }
                self.checked(Formula::and(parts))
            }
            "+" => {
                let mut acc = Polynomial::zero();
                for a in args {
                    acc = acc.add(&self.poly(a)?);
                    self.checked_poly(acc.clone())?;
                }
                Ok(Term::Real(acc))
            }
            "-" => {
                arity(1)?;
                let first = self.poly(&args[0])?;
                if args.len() == 1 {
                    return Ok(Term::Real(first.neg()));
                }
                let mut acc = first;
                for a in &args[1..] {
                    acc = acc.sub(&self.poly(a)?);
                }
                self.checked_poly(acc)
            }
            "*" => {
                arity(1)?;
                let mut acc = Polynomial::constant(Rational::one());
                for a in args {
                    let p = self.poly(a)?;
                    if acc.total_degree() + p.total_degree() > self.limits.max_degree {
                        return Err(ParseError::Limit("polynomial degree"));
                    }
                    if acc.num_terms().saturating_mul(p.num_terms())
                        > self.limits.max_terms.saturating_mul(4)
                    {
                        return Err(ParseError::Limit("polynomial size"));
                    }
                    acc = acc.mul(&p);
                    self.checked_poly(acc.clone())?;
                }
                Ok(Term::Real(acc))
            }
            "/" => {
                arity(2)?;
                let mut acc = self.poly(&args[0])?;
                for a in &args[1..] {
                    let d = self.poly(a)?;
                    if !d.is_constant() {
                        return Err(ParseError::Unsupported(
                            "division by a non-constant term".into(),
                        ));
                    }
                    let c = d.constant_term();
                    if c.is_zero() {
                        return Err(ParseError::Unsupported("division by zero".into()));
                    }
                    acc = acc.scale(&c.recip());
                }
                Ok(Term::Real(acc))
            }
            "to_real" | "to_int" | "is_int" | "div" | "mod" | "abs" => Err(
                ParseError::Unsupported(format!("`{op}` (integer arithmetic)")),
            ),
            other => {
                if self.lookup(other).is_ok() {
                    Err(ParseError::Malformed(format!(
                        "`{other}` is not a function"
                    )))
                } else {
                    Err(ParseError::Unsupported(format!("function `{other}`")))
                }
            }
        }
    }
}

/// `p kind 0` as a formula, folded when `p` is constant.
fn cmp_formula(p: Polynomial, kind: CmpKind) -> Formula {
    if p.is_constant() {
        let c = p.constant_term();
        let zero = Rational::zero();
        return Formula::Const(match kind {
            CmpKind::Ge => c >= zero,
            CmpKind::Le => c <= zero,
            CmpKind::Eq => c == zero,
        });
    }
    Formula::Lit(Literal::pos(Atom::cmp(p, kind)))
}
