//! Sparse multivariate polynomials over the rationals.

pub mod univariate;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::numeric::{smt_rational, Rational, Sign, Value};
pub use univariate::UnivariatePoly;

/// Dense identifier of an arithmetic variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RealVar(pub u32);

impl RealVar {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable x{} is unassigned", .0 .0)]
    Unassigned(RealVar),
    #[error("value is not rational")]
    NotRational,
    /// Exact computation would need arithmetic on two or more distinct
    /// algebraic values at once.
    #[error("move unavailable: substitution involves several algebraic values")]
    MoveUnavailable,
}

/// Product of variables with positive exponents, sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(RealVar, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(x: RealVar) -> Self {
        Monomial(vec![(x, 1)])
    }

    pub fn from_powers(mut powers: Vec<(RealVar, u32)>) -> Self {
        powers.retain(|&(_, e)| e > 0);
        powers.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(RealVar, u32)> = Vec::with_capacity(powers.len());
        for (v, e) in powers {
            match merged.last_mut() {
                Some((w, f)) if *w == v => *f += e,
                _ => merged.push((v, e)),
            }
        }
        Monomial(merged)
    }

    pub fn powers(&self) -> &[(RealVar, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, x: RealVar) -> u32 {
        self.0.iter().find(|&&(v, _)| v == x).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Removes `x` from the monomial, returning its exponent.
    fn split_off(&self, x: RealVar) -> (Monomial, u32) {
        let e = self.degree_in(x);
        (
            Monomial(self.0.iter().copied().filter(|&(v, _)| v != x).collect()),
            e,
        )
    }
}

/// Polynomial with rational coefficients: map from monomial to nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Rational::from_integer(n.into()))
    }

    pub fn var(x: RealVar) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(x), Rational::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m`, dropping the term if its coefficient cancels.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.0.is_empty())
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the greatest monomial; zero for the zero polynomial.
    pub fn leading_coefficient(&self) -> Rational {
        self.terms
            .values()
            .next_back()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Distinct variables, ascending.
    pub fn vars(&self) -> Vec<RealVar> {
        let mut vs: Vec<RealVar> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v))
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn contains_var(&self, x: RealVar) -> bool {
        self.terms.keys().any(|m| m.degree_in(x) > 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, x: RealVar) -> u32 {
        self.terms.keys().map(|m| m.degree_in(x)).max().unwrap_or(0)
    }

    pub fn is_linear_in(&self, x: RealVar) -> bool {
        self.degree_in(x) <= 1
    }

    /// Writes `self = coeffs[0] + coeffs[1]*x + coeffs[2]*x^2 + ...` with
    /// every `coeffs[k]` free of `x`.
    pub fn coefficients_in(&self, x: RealVar) -> Vec<Polynomial> {
        let mut out: Vec<Polynomial> = vec![Polynomial::zero(); self.degree_in(x) as usize + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(x);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Replaces `x` by the polynomial `by`.
    pub fn substitute(&self, x: RealVar, by: &Polynomial) -> Polynomial {
        let coeffs = self.coefficients_in(x);
        let mut acc = Polynomial::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(by).add(c);
        }
        acc
    }

    /// Exact value when every variable of the polynomial has a rational value.
    pub fn evaluate(&self, reals: &[Value]) -> Result<Rational, PolyError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let val = reals.get(v.index()).ok_or(PolyError::Unassigned(v))?;
                let r = val.as_rational().ok_or(PolyError::NotRational)?;
                t *= num_traits::pow(r.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Sign at the assignment. At most one distinct algebraic value may be involved.
    pub fn sign_at(&self, reals: &[Value]) -> Result<Sign, PolyError> {
        let mut alg: Option<RealVar> = None;
        for v in self.vars() {
            let val = reals.get(v.index()).ok_or(PolyError::Unassigned(v))?;
            if !val.is_rational() {
                if alg.is_some() {
                    return Err(PolyError::MoveUnavailable);
                }
                alg = Some(v);
            }
        }
        match alg {
            None => Ok(Sign::of(&self.evaluate(reals)?)),
            Some(y) => {
                let q = self.substitute_except(reals, y)?;
                Ok(reals[y.index()].sign_of(&q))
            }
        }
    }

    /// Substitutes the rational values of every variable except `x`, leaving a
    /// univariate polynomial in `x`. Any irrational value among the
    /// substituted variables makes the result unavailable.
    pub fn substitute_except(
        &self,
        reals: &[Value],
        x: RealVar,
    ) -> Result<UnivariatePoly, PolyError> {
        let mut coeffs: Vec<Rational> = vec![Rational::zero(); self.degree_in(x) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let mut ex = 0;
            for &(v, e) in &m.0 {
                if v == x {
                    ex = e;
                    continue;
                }
                let val = reals.get(v.index()).ok_or(PolyError::Unassigned(v))?;
                let r = val.as_rational().ok_or(PolyError::MoveUnavailable)?;
                t *= num_traits::pow(r.clone(), e as usize);
            }
            coeffs[ex as usize] += t;
        }
        Ok(UnivariatePoly::from_coeffs(coeffs))
    }

    /// Substitutes every variable except `x` and `y` (rationals only), giving
    /// coefficients of powers of `x` as univariate polynomials in `y`.
    pub fn substitute_except_pair(
        &self,
        reals: &[Value],
        x: RealVar,
        y: RealVar,
    ) -> Result<Vec<UnivariatePoly>, PolyError> {
        let mut out = vec![UnivariatePoly::zero(); self.degree_in(x) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let (mut ex, mut ey) = (0, 0);
            for &(v, e) in &m.0 {
                if v == x {
                    ex = e;
                } else if v == y {
                    ey = e;
                } else {
                    let val = reals.get(v.index()).ok_or(PolyError::Unassigned(v))?;
                    let r = val.as_rational().ok_or(PolyError::MoveUnavailable)?;
                    t *= num_traits::pow(r.clone(), e as usize);
                }
            }
            let mut mono = vec![Rational::zero(); ey as usize + 1];
            mono[ey as usize] = t;
            out[ex as usize] = out[ex as usize].add(&UnivariatePoly::from_coeffs(mono));
        }
        Ok(out)
    }

    /// Applies a variable renaming.
    pub fn rename(&self, f: &dyn Fn(RealVar) -> RealVar) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| {
            (
                Monomial::from_powers(m.0.iter().map(|&(v, e)| (f(v), e)).collect()),
                c.clone(),
            )
        }))
    }

    /// SMT-LIB rendering using `name` for variables.
    pub fn to_smt(&self, name: &dyn Fn(RealVar) -> String) -> String {
        let mono = |m: &Monomial| -> Vec<String> {
            m.0.iter()
                .flat_map(|&(v, e)| std::iter::repeat_n(name(v), e as usize))
                .collect()
        };
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut factors = mono(m);
                if !c.is_one() || factors.is_empty() {
                    factors.insert(0, smt_rational(c));
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    format!("(* {})", factors.join(" "))
                }
            })
            .collect();
        match terms.len() {
            0 => "0.0".to_string(),
            1 => terms.into_iter().next().unwrap(),
            _ => format!("(+ {})", terms.join(" ")),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_smt(&|v| format!("x{}", v.0)))
    }
}
