//! Clauses over boolean and polynomial atoms, SMT-LIB input, preprocessing
//! and exact model checking.

pub mod ast_eval;
mod cnf;
pub mod model;
mod parse;
pub mod preprocess;
pub mod sexpr;

use std::fmt;

use num_traits::Zero;

use crate::numeric::{Rational, Sign, Value};
use crate::poly::{PolyError, Polynomial, RealVar};

pub use parse::{parse_smt2, parse_smt2_with, ParseError, ParseLimits, Script};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolVar(pub u32);

impl BoolVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpKind {
    Ge,
    Le,
    Eq,
}

impl CmpKind {
    pub fn flip(self) -> CmpKind {
        match self {
            CmpKind::Ge => CmpKind::Le,
            CmpKind::Le => CmpKind::Ge,
            CmpKind::Eq => CmpKind::Eq,
        }
    }
}

/// `b`, or `p kind 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Bool(BoolVar),
    Cmp { poly: Polynomial, kind: CmpKind },
}

impl Atom {
    /// `p kind 0`, scaled so the leading coefficient is positive.
    pub fn cmp(poly: Polynomial, kind: CmpKind) -> Atom {
        if poly.leading_coefficient() < Rational::zero() {
            Atom::Cmp {
                poly: poly.neg(),
                kind: kind.flip(),
            }
        } else {
            Atom::Cmp { poly, kind }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
    /// Evaluated in its relaxed form; only for non-negated comparisons.
    pub relaxed: bool,
}

/// Which signs of a polynomial satisfy a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignSet {
    pub neg: bool,
    pub zero: bool,
    pub pos: bool,
}

impl SignSet {
    pub fn contains(self, s: Sign) -> bool {
        match s {
            Sign::Neg => self.neg,
            Sign::Zero => self.zero,
            Sign::Pos => self.pos,
        }
    }

    pub fn complement(self) -> SignSet {
        SignSet {
            neg: !self.neg,
            zero: !self.zero,
            pos: !self.pos,
        }
    }
}

/// A comparison literal as sign conditions on shifted copies of its polynomial:
/// the literal holds iff `sign(p + shift)` lies in the set for every part.
pub struct SignConditions {
    pub parts: Vec<(Rational, SignSet)>,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal {
            atom,
            negated: false,
            relaxed: false,
        }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal {
            atom,
            negated: true,
            relaxed: false,
        }
    }

    pub fn negate(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
            relaxed: false,
        }
    }

    pub fn poly(&self) -> Option<&Polynomial> {
        match &self.atom {
            Atom::Cmp { poly, .. } => Some(poly),
            Atom::Bool(_) => None,
        }
    }

    pub fn bool_var(&self) -> Option<BoolVar> {
        match self.atom {
            Atom::Bool(b) => Some(b),
            Atom::Cmp { .. } => None,
        }
    }

    /// Non-negated `p >= 0`, `p <= 0` or `p = 0`.
    pub fn is_relaxable(&self) -> bool {
        !self.negated && matches!(self.atom, Atom::Cmp { .. })
    }

    pub fn contains_var(&self, x: RealVar) -> bool {
        self.poly().is_some_and(|p| p.contains_var(x))
    }

    pub fn sign_conditions(&self, eps_p: &Rational) -> Option<SignConditions> {
        let Atom::Cmp { kind, .. } = &self.atom else {
            return None;
        };
        let set = |neg, zero, pos| SignSet { neg, zero, pos };
        let zero = Rational::zero();
        let parts = if self.relaxed {
            match kind {
                CmpKind::Ge => vec![(eps_p.clone(), set(false, false, true))],
                CmpKind::Le => vec![(-eps_p, set(true, false, false))],
                CmpKind::Eq => vec![
                    (eps_p.clone(), set(false, false, true)),
                    (-eps_p, set(true, false, false)),
                ],
            }
        } else {
            let s = match kind {
                CmpKind::Ge => set(false, true, true),
                CmpKind::Le => set(true, true, false),
                CmpKind::Eq => set(false, true, false),
            };
            vec![(zero, if self.negated { s.complement() } else { s })]
        };
        Some(SignConditions { parts })
    }

    pub fn eval(&self, asg: &Assignment, eps_p: &Rational) -> Result<bool, PolyError> {
        match &self.atom {
            Atom::Bool(b) => Ok(asg.bools[b.index()] != self.negated),
            Atom::Cmp { poly, .. } => {
                let conds = self.sign_conditions(eps_p).expect("comparison");
                for (shift, set) in &conds.parts {
                    if !set.contains(shifted_sign(poly, &asg.reals, shift)?) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Sign of `p + shift` at the assignment.
pub fn shifted_sign(p: &Polynomial, reals: &[Value], shift: &Rational) -> Result<Sign, PolyError> {
    match p.evaluate(reals) {
        Ok(v) => Ok(Sign::of(&(v + shift))),
        Err(PolyError::NotRational) => {
            if shift.is_zero() {
                p.sign_at(reals)
            } else {
                p.add(&Polynomial::constant(shift.clone())).sign_at(reals)
            }
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Clause {
        Clause { literals }
    }

    pub fn real_vars(&self) -> Vec<RealVar> {
        let mut vs: Vec<RealVar> = self
            .literals
            .iter()
            .filter_map(Literal::poly)
            .flat_map(Polynomial::vars)
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn bool_vars(&self) -> Vec<BoolVar> {
        let mut vs: Vec<BoolVar> = self.literals.iter().filter_map(Literal::bool_var).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn eval(&self, asg: &Assignment, eps_p: &Rational) -> Result<bool, PolyError> {
        for l in &self.literals {
            if l.eval(asg, eps_p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn sat_count(&self, asg: &Assignment, eps_p: &Rational) -> Result<usize, PolyError> {
        let mut n = 0;
        for l in &self.literals {
            if l.eval(asg, eps_p)? {
                n += 1;
            }
        }
        Ok(n)
    }
}

/// Complete assignment indexed by dense variable ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub bools: Vec<bool>,
    pub reals: Vec<Value>,
}

impl Assignment {
    pub fn initial(num_bools: usize, num_reals: usize) -> Assignment {
        Assignment {
            bools: vec![true; num_bools],
            reals: vec![Value::zero(); num_reals],
        }
    }

    pub fn real(&self, x: RealVar) -> &Value {
        &self.reals[x.index()]
    }
}

/// A clause set together with variable names.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    pub real_names: Vec<String>,
    pub bool_names: Vec<String>,
    /// Booleans at or past this index were introduced by CNF conversion.
    pub num_user_bools: usize,
    /// Reals at or past this index were introduced for `ite` terms.
    pub num_user_reals: usize,
    pub clauses: Vec<Clause>,
}

impl Problem {
    pub fn num_reals(&self) -> usize {
        self.real_names.len()
    }

    pub fn num_bools(&self) -> usize {
        self.bool_names.len()
    }

    pub fn fresh_bool(&mut self, prefix: &str) -> BoolVar {
        let b = BoolVar(self.bool_names.len() as u32);
        self.bool_names.push(format!("{prefix}{}", b.0));
        b
    }

    pub fn fresh_real(&mut self, prefix: &str) -> RealVar {
        let x = RealVar(self.real_names.len() as u32);
        self.real_names.push(format!("{prefix}{}", x.0));
        x
    }

    pub fn real_name(&self, x: RealVar) -> &str {
        &self.real_names[x.index()]
    }

    pub fn literal_to_smt(&self, l: &Literal) -> String {
        let body = match &l.atom {
            Atom::Bool(b) => self.bool_names[b.index()].clone(),
            Atom::Cmp { poly, kind } => {
                let op = match kind {
                    CmpKind::Ge => ">=",
                    CmpKind::Le => "<=",
                    CmpKind::Eq => "=",
                };
                format!(
                    "({op} {} 0.0)",
                    poly.to_smt(&|v| self.real_names[v.index()].clone())
                )
            }
        };
        if l.negated {
            format!("(not {body})")
        } else {
            body
        }
    }

    /// The clause set as an SMT-LIB script.
    pub fn to_smt2(&self) -> String {
        let mut out = String::from("(set-logic QF_NRA)\n");
        for n in &self.real_names {
            out.push_str(&format!("(declare-fun {n} () Real)\n"));
        }
        for n in &self.bool_names {
            out.push_str(&format!("(declare-fun {n} () Bool)\n"));
        }
        for c in &self.clauses {
            let lits: Vec<String> = c.literals.iter().map(|l| self.literal_to_smt(l)).collect();
            match lits.len() {
                0 => out.push_str("(assert false)\n"),
                1 => out.push_str(&format!("(assert {})\n", lits[0])),
                _ => out.push_str(&format!("(assert (or {}))\n", lits.join(" "))),
            }
        }
        out.push_str("(check-sat)\n");
        out
    }
}

/// True iff every clause holds exactly, with all atoms in original form.
pub fn verify_model(clauses: &[Clause], asg: &Assignment) -> bool {
    let zero = Rational::zero();
    clauses.iter().all(|c| {
        c.literals.iter().any(|l| {
            let plain = Literal {
                relaxed: false,
                ..l.clone()
            };
            plain.eval(asg, &zero).unwrap_or(false)
        })
    })
}

impl fmt::Display for CmpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpKind::Ge => ">=",
            CmpKind::Le => "<=",
            CmpKind::Eq => "=",
        })
    }
}
