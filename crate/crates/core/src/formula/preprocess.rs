//! Unit propagation, bound merging and linear elimination.

use std::collections::HashMap;

use num_traits::Zero;
use thiserror::Error;

use super::{Assignment, Atom, BoolVar, Clause, CmpKind, Literal};
use crate::numeric::{cmp_value, Rational, Value};
use crate::poly::{Monomial, Polynomial, RealVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("contradiction found during preprocessing: {0}")]
pub struct Contradiction(pub String);

/// Simplified clauses plus what is needed to extend their models to the input.
#[derive(Clone, Debug, Default)]
pub struct Preprocessed {
    pub clauses: Vec<Clause>,
    /// `x := poly`, in elimination order.
    pub eliminated: Vec<(RealVar, Polynomial)>,
    pub fixed_bools: Vec<(BoolVar, bool)>,
}

impl Preprocessed {
    /// Fills in fixed booleans and eliminated reals. Fails when an
    /// eliminated value would combine two distinct irrational values.
    pub fn extend_model(&self, asg: &mut Assignment) -> bool {
        for &(b, v) in &self.fixed_bools {
            asg.bools[b.index()] = v;
        }
        for (x, p) in self.eliminated.iter().rev() {
            match eval_affine(p, &asg.reals) {
                Some(v) => asg.reals[x.index()] = v,
                None => return false,
            }
        }
        true
    }
}

/// Value of a polynomial of degree at most one; irrational terms must share
/// a single algebraic value.
fn eval_affine(p: &Polynomial, reals: &[Value]) -> Option<Value> {
    let mut rational = Rational::zero();
    let mut alg: Option<(Value, Rational)> = None;
    for (m, c) in p.terms() {
        match m.powers() {
            [] => rational += c,
            [(v, 1)] => match &reals[v.index()] {
                Value::Rational(r) => rational += c * r,
                a => match &mut alg {
                    None => alg = Some((a.clone(), c.clone())),
                    Some((b, k)) if cmp_value(a, b).is_eq() => *k += c,
                    Some(_) => return None,
                },
            },
            _ => return None,
        }
    }
    match alg {
        Some((Value::Algebraic(a), k)) if !k.is_zero() => Some(a.affine(&k, &rational).into()),
        _ => Some(Value::Rational(rational)),
    }
}

pub fn preprocess(clauses: &[Clause]) -> Result<Preprocessed, Contradiction> {
    let mut out = Preprocessed {
        clauses: clauses.to_vec(),
        ..Default::default()
    };
    if out.clauses.iter().any(|c| c.literals.is_empty()) {
        return Err(Contradiction("empty clause".into()));
    }
    loop {
        let mut changed = propagate_bools(&mut out)?;
        changed |= merge_bounds(&mut out.clauses);
        changed |= eliminate_one(&mut out)?;
        if !changed {
            return Ok(out);
        }
    }
}

fn propagate_bools(out: &mut Preprocessed) -> Result<bool, Contradiction> {
    let mut changed = false;
    while let Some(lit) = out
        .clauses
        .iter()
        .find(|c| c.literals.len() == 1 && c.literals[0].bool_var().is_some())
        .map(|c| c.literals[0].clone())
    {
        let b = lit.bool_var().unwrap();
        let value = !lit.negated;
        out.fixed_bools.push((b, value));
        changed = true;
        let mut kept = Vec::with_capacity(out.clauses.len());
        for mut c in std::mem::take(&mut out.clauses) {
            if c.literals
                .iter()
                .any(|l| l.bool_var() == Some(b) && l.negated != value)
            {
                continue;
            }
            c.literals.retain(|l| l.bool_var() != Some(b));
            if c.literals.is_empty() {
                let name = format!("boolean b{} forced both ways", b.0);
                return Err(Contradiction(name));
            }
            kept.push(c);
        }
        out.clauses = kept;
    }
    Ok(changed)
}

/// Unit `p >= 0` with unit `p <= 0` becomes unit `p = 0`; duplicate units go.
fn merge_bounds(clauses: &mut Vec<Clause>) -> bool {
    let mut units: HashMap<Polynomial, (Option<usize>, Option<usize>)> = HashMap::new();
    for (i, c) in clauses.iter().enumerate() {
        if let [Literal {
            atom: Atom::Cmp { poly, kind },
            negated: false,
            ..
        }] = &c.literals[..]
        {
            let e = units.entry(poly.clone()).or_default();
            match kind {
                CmpKind::Ge => e.0 = e.0.or(Some(i)),
                CmpKind::Le => e.1 = e.1.or(Some(i)),
                CmpKind::Eq => {}
            }
        }
    }
    let mut drop = vec![false; clauses.len()];
    let mut changed = false;
    let mut pairs: Vec<(usize, usize)> = units
        .values()
        .filter_map(|&(ge, le)| Some((ge?, le?)))
        .collect();
    pairs.sort_unstable();
    for (ge, le) in pairs {
        let Atom::Cmp { poly, .. } = &clauses[ge].literals[0].atom else {
            unreachable!()
        };
        clauses[ge].literals[0] = Literal::pos(Atom::Cmp {
            poly: poly.clone(),
            kind: CmpKind::Eq,
        });
        drop[le] = true;
        changed = true;
    }
    let mut seen = std::collections::HashSet::new();
    for (i, c) in clauses.iter().enumerate() {
        if c.literals.len() == 1 && !drop[i] && !seen.insert(c.literals[0].clone()) {
            drop[i] = true;
            changed = true;
        }
    }
    let mut i = 0;
    clauses.retain(|_| {
        i += 1;
        !drop[i - 1]
    });
    changed
}

/// Eliminates one variable using a unit equation `c*x + q = 0` where `q` is
/// affine in at most two variables.
fn eliminate_one(out: &mut Preprocessed) -> Result<bool, Contradiction> {
    let found = out
        .clauses
        .iter()
        .enumerate()
        .find_map(|(i, c)| match &c.literals[..] {
            [Literal {
                atom:
                    Atom::Cmp {
                        poly,
                        kind: CmpKind::Eq,
                    },
                negated: false,
                ..
            }] => {
                let vars = poly.vars();
                (poly.total_degree() == 1 && (1..=3).contains(&vars.len()))
                    .then(|| (i, poly.clone(), vars[0]))
            }
            _ => None,
        });
    let Some((idx, poly, x)) = found else {
        return Ok(false);
    };
    out.clauses.remove(idx);
    let c = poly
        .terms()
        .find(|(m, _)| **m == Monomial::var(x))
        .map(|(_, c)| c.clone())
        .expect("x occurs linearly");
    let q = poly.sub(&Polynomial::var(x).scale(&c));
    let by = q.scale(&(-c.recip()));
    let mut kept = Vec::with_capacity(out.clauses.len());
    for cl in std::mem::take(&mut out.clauses) {
        if !cl.literals.iter().any(|l| l.contains_var(x)) {
            kept.push(cl);
            continue;
        }
        let mut lits = Vec::with_capacity(cl.literals.len());
        let mut satisfied = false;
        for l in cl.literals {
            let Atom::Cmp { poly, kind } = &l.atom else {
                lits.push(l);
                continue;
            };
            if !poly.contains_var(x) {
                lits.push(l);
                continue;
            }
            let p = poly.substitute(x, &by);
            if p.is_constant() {
                let v = p.constant_term();
                let holds = match kind {
                    CmpKind::Ge => v >= Rational::zero(),
                    CmpKind::Le => v <= Rational::zero(),
                    CmpKind::Eq => v.is_zero(),
                };
                if holds != l.negated {
                    satisfied = true;
                    break;
                }
            } else {
                lits.push(Literal {
                    atom: Atom::cmp(p, *kind),
                    negated: l.negated,
                    relaxed: false,
                });
            }
        }
        if satisfied {
            continue;
        }
        if lits.is_empty() {
            return Err(Contradiction(format!(
                "eliminating x{} falsifies a clause",
                x.0
            )));
        }
        kept.push(Clause::new(lits));
    }
    out.clauses = kept;
    out.eliminated.push((x, by));
    Ok(true)
}
