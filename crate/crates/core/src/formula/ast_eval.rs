//! Direct evaluation of a script's assertions, bypassing clausal form.

use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use super::parse::Sort;
use super::sexpr::SExpr;
use super::{Assignment, Script};
use crate::numeric::{parse_rational, Rational, Sign, Value};
use crate::poly::{Polynomial, RealVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot evaluate: {0}")]
pub struct EvalError(pub String);

#[derive(Clone, Debug)]
enum V {
    B(bool),
    N(Rational),
    /// Term over the variables that hold irrational values.
    P(Polynomial),
}

impl V {
    fn poly(self) -> Polynomial {
        match self {
            V::N(r) => Polynomial::constant(r),
            V::P(p) => p,
            V::B(_) => unreachable!("checked by caller"),
        }
    }
}

struct Evaluator<'a> {
    globals: HashMap<&'a str, V>,
    defs: HashMap<&'a str, &'a SExpr>,
    reals: &'a [Value],
}

/// Whether every assertion of `script` holds under `asg`, whose user
/// variables follow declaration order.
pub fn eval_script(script: &Script, asg: &Assignment) -> Result<bool, EvalError> {
    let mut globals = HashMap::new();
    let (mut nr, mut nb) = (0usize, 0usize);
    for (name, sort) in &script.declarations {
        let v = match sort {
            Sort::Real => {
                let val = asg
                    .reals
                    .get(nr)
                    .ok_or_else(|| EvalError(format!("no value for {name}")))?;
                let x = RealVar(nr as u32);
                nr += 1;
                match val {
                    Value::Rational(r) => V::N(r.clone()),
                    Value::Algebraic(_) => V::P(Polynomial::var(x)),
                }
            }
            Sort::Bool => {
                let b = *asg
                    .bools
                    .get(nb)
                    .ok_or_else(|| EvalError(format!("no value for {name}")))?;
                nb += 1;
                V::B(b)
            }
        };
        globals.insert(name.as_str(), v);
    }
    let defs = script
        .definitions
        .iter()
        .map(|(n, _, body)| (n.as_str(), body))
        .collect();
    let ev = Evaluator {
        globals,
        defs,
        reals: &asg.reals,
    };
    for a in &script.assertions {
        match ev.eval(a, &mut Vec::new())? {
            V::B(true) => {}
            V::B(false) => return Ok(false),
            _ => return Err(EvalError(format!("assertion `{a}` is not boolean"))),
        }
    }
    Ok(true)
}

type Scopes<'s> = Vec<HashMap<String, V>>;

impl Evaluator<'_> {
    fn boolean(&self, e: &SExpr, sc: &mut Scopes) -> Result<bool, EvalError> {
        match self.eval(e, sc)? {
            V::B(b) => Ok(b),
            _ => Err(EvalError(format!("`{e}` is not boolean"))),
        }
    }

    fn real(&self, e: &SExpr, sc: &mut Scopes) -> Result<V, EvalError> {
        match self.eval(e, sc)? {
            V::B(_) => Err(EvalError(format!("`{e}` is not real"))),
            v => Ok(v),
        }
    }

    fn sign(&self, v: V) -> Result<Sign, EvalError> {
        match v {
            V::N(r) => Ok(Sign::of(&r)),
            V::P(p) => p.sign_at(self.reals).map_err(|e| EvalError(e.to_string())),
            V::B(_) => unreachable!("checked by caller"),
        }
    }

    fn eval(&self, e: &SExpr, sc: &mut Scopes) -> Result<V, EvalError> {
        match e {
            SExpr::Symbol(s) => {
                if let Some(v) = sc.iter().rev().find_map(|m| m.get(s)) {
                    return Ok(v.clone());
                }
                if let Some(v) = self.globals.get(s.as_str()) {
                    return Ok(v.clone());
                }
                if let Some(body) = self.defs.get(s.as_str()) {
                    return self.eval(body, &mut Vec::new());
                }
                match s.as_str() {
                    "true" => Ok(V::B(true)),
                    "false" => Ok(V::B(false)),
                    _ => Err(EvalError(format!("unknown symbol {s}"))),
                }
            }
            SExpr::Number(n) => parse_rational(n)
                .map(V::N)
                .map_err(|e| EvalError(e.to_string())),
            SExpr::Str(_) => Err(EvalError("string".into())),
            SExpr::List(items) => {
                let (head, args) = items
                    .split_first()
                    .ok_or_else(|| EvalError("empty list".into()))?;
                let op = head
                    .as_symbol()
                    .ok_or_else(|| EvalError(format!("head of `{e}`")))?;
                self.apply(op, args, sc)
            }
        }
    }

    fn apply(&self, op: &str, args: &[SExpr], sc: &mut Scopes) -> Result<V, EvalError> {
        match op {
            "!" => self.eval(&args[0], sc),
            "let" => {
                let binds = args[0].as_list().ok_or_else(|| EvalError("let".into()))?;
                let mut m = HashMap::new();
                for b in binds {
                    let [SExpr::Symbol(n), t] = b.as_list().unwrap_or(&[]) else {
                        return Err(EvalError("let binding".into()));
                    };
                    m.insert(n.clone(), self.eval(t, sc)?);
                }
                sc.push(m);
                let r = self.eval(&args[1], sc);
                sc.pop();
                r
            }
            "not" => Ok(V::B(!self.boolean(&args[0], sc)?)),
            "and" => {
                let mut all = true;
                for a in args {
                    all &= self.boolean(a, sc)?;
                }
                Ok(V::B(all))
            }
            "or" => {
                let mut any = false;
                for a in args {
                    any |= self.boolean(a, sc)?;
                }
                Ok(V::B(any))
            }
            "=>" => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.boolean(a, sc)?);
                }
                let mut acc = vals.pop().unwrap_or(true);
                while let Some(p) = vals.pop() {
                    acc = !p || acc;
                }
                Ok(V::B(acc))
            }
            "xor" => {
                let mut acc = false;
                for a in args {
                    acc ^= self.boolean(a, sc)?;
                }
                Ok(V::B(acc))
            }
            "ite" => {
                if self.boolean(&args[0], sc)? {
                    self.eval(&args[1], sc)
                } else {
                    self.eval(&args[2], sc)
                }
            }
            "=" | "distinct" => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.eval(a, sc)?);
                }
                let eq = |a: &V, b: &V| -> Result<bool, EvalError> {
                    match (a, b) {
                        (V::B(x), V::B(y)) => Ok(x == y),
                        (V::B(_), _) | (_, V::B(_)) => Err(EvalError("mixed sorts".into())),
                        _ => Ok(self.sign(sub(a.clone(), b.clone()))? == Sign::Zero),
                    }
                };
                if op == "=" {
                    for w in vals.windows(2) {
                        if !eq(&w[0], &w[1])? {
                            return Ok(V::B(false));
                        }
                    }
                    Ok(V::B(true))
                } else {
                    for i in 0..vals.len() {
                        for j in i + 1..vals.len() {
                            if eq(&vals[i], &vals[j])? {
                                return Ok(V::B(false));
                            }
                        }
                    }
                    Ok(V::B(true))
                }
            }
            "<" | "<=" | ">" | ">=" => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.real(a, sc)?);
                }
                for w in vals.windows(2) {
                    let s = self.sign(sub(w[0].clone(), w[1].clone()))?;
                    let ok = match op {
                        "<" => s == Sign::Neg,
                        "<=" => s != Sign::Pos,
                        ">" => s == Sign::Pos,
                        _ => s != Sign::Neg,
                    };
                    if !ok {
                        return Ok(V::B(false));
                    }
                }
                Ok(V::B(true))
            }
            "+" => {
                let mut acc = V::N(Rational::zero());
                for a in args {
                    acc = add(acc, self.real(a, sc)?);
                }
                Ok(acc)
            }
            "-" => {
                let first = self.real(&args[0], sc)?;
                if args.len() == 1 {
                    return Ok(neg(first));
                }
                let mut acc = first;
                for a in &args[1..] {
                    acc = sub(acc, self.real(a, sc)?);
                }
                Ok(acc)
            }
            "*" => {
                let mut acc = V::N(Rational::one());
                for a in args {
                    acc = mul(acc, self.real(a, sc)?);
                }
                Ok(acc)
            }
            "/" => {
                let mut acc = self.real(&args[0], sc)?;
                for a in &args[1..] {
                    match self.real(a, sc)? {
                        V::N(d) if !d.is_zero() => acc = mul(acc, V::N(d.recip())),
                        _ => return Err(EvalError("division".into())),
                    }
                }
                Ok(acc)
            }
            other => Err(EvalError(format!("operator {other}"))),
        }
    }
}

fn add(a: V, b: V) -> V {
    match (a, b) {
        (V::N(x), V::N(y)) => V::N(x + y),
        (a, b) => V::P(a.poly().add(&b.poly())),
    }
}

fn neg(a: V) -> V {
    match a {
        V::N(x) => V::N(-x),
        a => V::P(a.poly().neg()),
    }
}

fn sub(a: V, b: V) -> V {
    add(a, neg(b))
}

fn mul(a: V, b: V) -> V {
    match (a, b) {
        (V::N(x), V::N(y)) => V::N(x * y),
        (a, b) => V::P(a.poly().mul(&b.poly())),
    }
}
