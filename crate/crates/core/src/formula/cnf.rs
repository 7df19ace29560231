//! Clausal form with bounded distribution and definitional booleans.

use super::{Atom, Clause, Literal, ParseError, Problem};

/// Boolean structure over literals. The last field of compound nodes is the
/// node depth.
#[derive(Clone, Debug)]
pub(crate) enum Formula {
    Const(bool),
    Lit(Literal),
    Not(Box<Formula>, u32),
    And(Vec<Formula>, u32),
    Or(Vec<Formula>, u32),
}

impl Formula {
    pub fn depth(&self) -> u32 {
        match self {
            Formula::Const(_) | Formula::Lit(_) => 0,
            Formula::Not(_, d) | Formula::And(_, d) | Formula::Or(_, d) => *d,
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Lit(l) => Formula::Lit(l.negate()),
            Formula::Not(inner, _) => *inner,
            other => {
                let d = other.depth() + 1;
                Formula::Not(Box::new(other), d)
            }
        }
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            match f {
                Formula::Const(true) => {}
                Formula::Const(false) => return Formula::Const(false),
                Formula::And(inner, _) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::Const(true),
            1 => out.pop().unwrap(),
            _ => {
                let d = out.iter().map(Formula::depth).max().unwrap_or(0) + 1;
                Formula::And(out, d)
            }
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            match f {
                Formula::Const(false) => {}
                Formula::Const(true) => return Formula::Const(true),
                Formula::Or(inner, _) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::Const(false),
            1 => out.pop().unwrap(),
            _ => {
                let d = out.iter().map(Formula::depth).max().unwrap_or(0) + 1;
                Formula::Or(out, d)
            }
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(vec![Formula::not(a), b])
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(vec![
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        ])
    }

    /// Pushes negations to the literals.
    fn nnf(self, positive: bool) -> Formula {
        match self {
            Formula::Const(b) => Formula::Const(b == positive),
            Formula::Lit(l) => Formula::Lit(if positive { l } else { l.negate() }),
            Formula::Not(inner, _) => inner.nnf(!positive),
            Formula::And(fs, _) => {
                let parts = fs.into_iter().map(|f| f.nnf(positive)).collect();
                if positive {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(fs, _) => {
                let parts = fs.into_iter().map(|f| f.nnf(positive)).collect();
                if positive {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
        }
    }
}

pub(crate) struct CnfBuilder<'a> {
    pub problem: &'a mut Problem,
    pub blowup: usize,
    pub max_clauses: usize,
}

impl CnfBuilder<'_> {
    /// Appends the clauses of `f` to the problem.
    pub fn add(&mut self, f: Formula) -> Result<(), ParseError> {
        let clauses = self.cnf(f.nnf(true))?;
        for c in clauses {
            if let Some(c) = normalize_clause(c) {
                self.problem.clauses.push(Clause::new(c));
            }
        }
        if self.problem.clauses.len() > self.max_clauses {
            return Err(ParseError::Limit("clause count"));
        }
        Ok(())
    }

    /// Clauses of a formula in negation normal form.
    fn cnf(&mut self, f: Formula) -> Result<Vec<Vec<Literal>>, ParseError> {
        match f {
            Formula::Const(true) => Ok(Vec::new()),
            Formula::Const(false) => Ok(vec![Vec::new()]),
            Formula::Lit(l) => Ok(vec![vec![l]]),
            Formula::Not(..) => unreachable!("formula is in negation normal form"),
            Formula::And(fs, _) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(self.cnf(f)?);
                    if out.len() > self.max_clauses {
                        return Err(ParseError::Limit("clause count"));
                    }
                }
                Ok(out)
            }
            Formula::Or(fs, _) => {
                let mut parts = Vec::with_capacity(fs.len());
                for f in fs {
                    parts.push(self.cnf(f)?);
                }
                if parts.iter().any(Vec::is_empty) {
                    return Ok(Vec::new());
                }
                let sum: usize = parts.iter().map(Vec::len).sum();
                let product = parts
                    .iter()
                    .try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
                match product {
                    Some(prod) if prod <= self.blowup * sum.max(1) => Ok(distribute(parts)),
                    _ => {
                        let mut clause = Vec::new();
                        for p in parts {
                            if p.len() == 1 {
                                clause.extend(p.into_iter().next().unwrap());
                            } else {
                                clause.push(self.define(p)?);
                            }
                        }
                        Ok(vec![clause])
                    }
                }
            }
        }
    }

    /// Fresh boolean `d` equivalent to the conjunction of `clauses`.
    fn define(&mut self, clauses: Vec<Vec<Literal>>) -> Result<Literal, ParseError> {
        let d = self.problem.fresh_bool("cnf!");
        let d_pos = Literal::pos(Atom::Bool(d));
        // d -> every clause
        for c in &clauses {
            let mut c = c.clone();
            c.push(d_pos.negate());
            self.problem.clauses.push(Clause::new(c));
        }
        // every clause -> d, i.e. d or some clause fails
        let failing: Vec<Formula> = clauses
            .into_iter()
            .map(|c| Formula::and(c.into_iter().map(|l| Formula::Lit(l.negate())).collect()))
            .collect();
        let back = Formula::or(vec![Formula::Lit(d_pos.clone()), Formula::or(failing)]);
        for c in self.cnf(back)? {
            if let Some(c) = normalize_clause(c) {
                self.problem.clauses.push(Clause::new(c));
            }
        }
        if self.problem.clauses.len() > self.max_clauses {
            return Err(ParseError::Limit("clause count"));
        }
        Ok(d_pos)
    }
}

fn distribute(parts: Vec<Vec<Vec<Literal>>>) -> Vec<Vec<Literal>> {
    let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(acc.len() * p.len());
        for a in &acc {
            for c in &p {
                let mut merged = a.clone();
                merged.extend(c.iter().cloned());
                next.push(merged);
            }
        }
        acc = next;
    }
    acc
}

/// Removes duplicate literals; `None` for tautologies.
fn normalize_clause(mut c: Vec<Literal>) -> Option<Vec<Literal>> {
    let mut seen: Vec<Literal> = Vec::with_capacity(c.len());
    c.retain(|l| {
        if seen.contains(l) {
            false
        } else {
            seen.push(l.clone());
            true
        }
    });
    let tautology = c.iter().any(|l| c.contains(&l.negate()));
    (!tautology).then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::BoolVar;

    fn b(i: u32) -> Formula {
        Formula::Lit(Literal::pos(Atom::Bool(BoolVar(i))))
    }

    fn problem(n: usize) -> Problem {
        Problem {
            bool_names: (0..n).map(|i| format!("b{i}")).collect(),
            num_user_bools: n,
            ..Problem::default()
        }
    }

    #[test]
    fn small_disjunction_distributes() {
        let mut p = problem(4);
        let f = Formula::or(vec![
            Formula::and(vec![b(0), b(1)]),
            Formula::and(vec![b(2), b(3)]),
        ]);
        CnfBuilder {
            problem: &mut p,
            blowup: 8,
            max_clauses: 1000,
        }
        .add(f)
        .unwrap();
        assert_eq!(p.clauses.len(), 4);
        assert_eq!(p.num_bools(), 4);
    }

    #[test]
    fn large_disjunction_gets_definitions() {
        let n = 12;
        let mut p = problem(2 * n);
        let f = Formula::or(
            (0..n as u32)
                .map(|i| Formula::and(vec![b(2 * i), b(2 * i + 1)]))
                .collect(),
        );
        CnfBuilder {
            problem: &mut p,
            blowup: 8,
            max_clauses: 100_000,
        }
        .add(f)
        .unwrap();
        assert_eq!(p.num_bools(), 3 * n);
        // each definition: two forward clauses and one backward clause, plus the top clause
        assert_eq!(p.clauses.len(), 3 * n + 1);
    }

    #[test]
    fn negation_pushes_through() {
        let mut p = problem(2);
        let f = Formula::not(Formula::or(vec![b(0), b(1)]));
        CnfBuilder {
            problem: &mut p,
            blowup: 8,
            max_clauses: 1000,
        }
        .add(f)
        .unwrap();
        assert_eq!(p.clauses.len(), 2);
        assert!(p
            .clauses
            .iter()
            .all(|c| c.literals.len() == 1 && c.literals[0].negated));
    }

    #[test]
    fn tautologies_vanish() {
        let mut p = problem(1);
        let f = Formula::or(vec![b(0), Formula::not(b(0))]);
        CnfBuilder {
            problem: &mut p,
            blowup: 8,
            max_clauses: 1000,
        }
        .add(f)
        .unwrap();
        assert!(p.clauses.is_empty());
    }
}
