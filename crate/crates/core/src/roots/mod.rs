//! Real root isolation and feasible sets of literals and clauses.

mod interval;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::formula::{Assignment, Clause, Literal, SignSet};
use crate::numeric::{AlgebraicNumber, Rational, Sign, Value};
use crate::poly::univariate::{sign_variations_at, UnivariatePoly};
use crate::poly::{PolyError, Polynomial, RealVar};

pub use interval::{Interval, IntervalSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("interval endpoint is a root")]
    EndpointRoot,
    #[error("polynomial is not linear")]
    NotLinear,
    #[error("clause does not mention exactly one real variable")]
    NotUnivariate,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Distinct real roots in increasing order with the sign of the polynomial
/// on each open gap: `gap_signs[i]` is the sign left of `roots[i]`, and the
/// last entry is the sign right of every root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootIsolation {
    pub roots: Vec<Value>,
    pub gap_signs: Vec<Sign>,
}

impl RootIsolation {
    fn constant(s: Sign) -> RootIsolation {
        RootIsolation {
            roots: Vec::new(),
            gap_signs: vec![s],
        }
    }

    /// Values where the sign lies in `allowed`.
    pub fn select(&self, allowed: SignSet) -> IntervalSet {
        let mut members = Vec::with_capacity(2 * self.roots.len() + 1);
        for (i, s) in self.gap_signs.iter().enumerate() {
            members.push(allowed.contains(*s));
            if i < self.roots.len() {
                members.push(allowed.zero);
            }
        }
        IntervalSet::from_pieces(&self.roots, &members)
    }

    /// Sign at `v`.
    pub fn sign_at(&self, v: &Value) -> Sign {
        let i = self.roots.partition_point(|r| r < v);
        if i < self.roots.len() && self.roots[i] == *v {
            Sign::Zero
        } else {
            self.gap_signs[i]
        }
    }
}

/// Distinct roots of `q` in `(lo, hi)` by Sturm's theorem.
pub fn sturm_count(q: &UnivariatePoly, lo: &Rational, hi: &Rational) -> Result<usize, RootError> {
    if q.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    if q.sign_at(lo) == Sign::Zero || q.sign_at(hi) == Sign::Zero {
        return Err(RootError::EndpointRoot);
    }
    if lo >= hi {
        return Ok(0);
    }
    let seq = q.square_free().sturm_sequence();
    Ok(sign_variations_at(&seq, lo).saturating_sub(sign_variations_at(&seq, hi)))
}

/// The root of a degree-one polynomial.
pub fn solve_linear(q: &UnivariatePoly) -> Result<Rational, RootError> {
    if q.degree() != Some(1) {
        return Err(RootError::NotLinear);
    }
    Ok(-q.coeff(0) / q.coeff(1))
}

/// All distinct real roots of `q`, with gap signs.
pub fn isolate_roots(q: &UnivariatePoly) -> Result<RootIsolation, RootError> {
    match q.degree() {
        None => return Err(RootError::ZeroPolynomial),
        Some(0) => return Ok(RootIsolation::constant(Sign::of(&q.coeff(0)))),
        Some(1) => {
            let r = solve_linear(q)?;
            let s = Sign::of(&q.coeff(1));
            return Ok(RootIsolation {
                roots: vec![Value::Rational(r)],
                gap_signs: vec![s.negate(), s],
            });
        }
        _ => {}
    }
    let s = q.square_free();
    let seq = s.sturm_sequence();
    let b = s.cauchy_bound();
    let mut brackets = Vec::new();
    bisect_roots(&s, &seq, -&b, b.clone(), &mut brackets);

    let mut roots: Vec<Option<Rational>> = Vec::with_capacity(brackets.len());
    let mut irrational_part = s.clone();
    for (lo, hi) in &brackets {
        let r = rational_root(&s, lo, hi);
        if let Some(r) = &r {
            irrational_part = irrational_part.div_rem(&UnivariatePoly::linear_root(r)).0;
        }
        roots.push(r);
    }
    let minpoly = irrational_part.primitive();
    let tight = Rational::new(1.into(), BigInt::from(1u64 << 32));
    let values: Vec<Value> = roots
        .into_iter()
        .zip(&brackets)
        .map(|(r, (lo, hi))| match r {
            Some(r) => Value::Rational(r),
            None => AlgebraicNumber::from_parts(minpoly.clone(), lo.clone(), hi.clone())
                .refine(&tight)
                .into(),
        })
        .collect();

    let mut gap_signs = Vec::with_capacity(brackets.len() + 1);
    if brackets.is_empty() {
        gap_signs.push(q.sign_at(&Rational::zero()));
    } else {
        gap_signs.push(q.sign_at(&brackets[0].0));
        for (_, hi) in &brackets {
            gap_signs.push(q.sign_at(hi));
        }
    }
    Ok(RootIsolation {
        roots: values,
        gap_signs,
    })
}

fn rational_root(s: &UnivariatePoly, lo: &Rational, hi: &Rational) -> Option<Rational> {
    crate::numeric::rational_root_in(s, lo, hi)
}

/// Appends isolating brackets, in increasing order, for the roots of
/// square-free `s` in `(lo, hi)`; endpoints are never roots.
fn bisect_roots(
    s: &UnivariatePoly,
    seq: &[UnivariatePoly],
    lo: Rational,
    hi: Rational,
    out: &mut Vec<(Rational, Rational)>,
) {
    let n = sign_variations_at(seq, &lo).saturating_sub(sign_variations_at(seq, &hi));
    match n {
        0 => {}
        1 => out.push((lo, hi)),
        _ => {
            let mid = split_point(s, &lo, &hi);
            bisect_roots(s, seq, lo, mid.clone(), out);
            bisect_roots(s, seq, mid, hi, out);
        }
    }
}

/// A non-root of `s` strictly inside `(lo, hi)`, close to the midpoint.
fn split_point(s: &UnivariatePoly, lo: &Rational, hi: &Rational) -> Rational {
    let w = hi - lo;
    let half = Rational::new(1.into(), 2.into());
    let mut t = half.clone();
    let mut step = Rational::new(1.into(), 4.into());
    loop {
        let m = lo + &w * &t;
        if s.sign_at(&m) != Sign::Zero {
            return m;
        }
        step *= &half;
        t = &half + &step;
    }
}

/// Sign regions of `p + shift` as a function of `x`, other variables fixed.
///
/// At most one other variable may hold an irrational value; in that case `p`
/// must be linear in `x` with a rational leading coefficient and a constant
/// part affine in that value.
pub fn restriction(
    p: &Polynomial,
    reals: &[Value],
    x: RealVar,
    shift: &Rational,
) -> Result<RootIsolation, PolyError> {
    match p.substitute_except(reals, x) {
        Ok(q) => {
            let q = q.add(&UnivariatePoly::constant(shift.clone()));
            Ok(isolate_roots(&q).unwrap_or(RootIsolation::constant(Sign::Zero)))
        }
        Err(PolyError::MoveUnavailable) => restriction_one_algebraic(p, reals, x, shift),
        Err(e) => Err(e),
    }
}

fn restriction_one_algebraic(
    p: &Polynomial,
    reals: &[Value],
    x: RealVar,
    shift: &Rational,
) -> Result<RootIsolation, PolyError> {
    let mut alg = p
        .vars()
        .into_iter()
        .filter(|&v| v != x && !reals[v.index()].is_rational());
    let y = alg.next().ok_or(PolyError::MoveUnavailable)?;
    if alg.next().is_some() {
        return Err(PolyError::MoveUnavailable);
    }
    let alpha = reals[y.index()].as_algebraic().expect("irrational").clone();
    let m = alpha.minpoly();
    let mut coeffs = p.substitute_except_pair(reals, x, y)?;
    coeffs[0] = coeffs[0].add(&UnivariatePoly::constant(shift.clone()));
    let signs: Vec<Sign> = coeffs.iter().map(|c| alpha.sign_of(c)).collect();
    let d = signs.iter().rposition(|s| *s != Sign::Zero);
    match d {
        None => Ok(RootIsolation::constant(Sign::Zero)),
        Some(0) => Ok(RootIsolation::constant(signs[0])),
        Some(1) => {
            let c1 = coeffs[1].rem(m);
            let c0 = coeffs[0].rem(m);
            if c1.degree() != Some(0) || c0.degree().unwrap_or(0) > 1 {
                return Err(PolyError::MoveUnavailable);
            }
            // x = -(a*alpha + b) / c
            let c = c1.coeff(0);
            let a = -c0.coeff(1) / &c;
            let b = -c0.coeff(0) / &c;
            let root = if a.is_zero() {
                Value::Rational(b)
            } else {
                alpha.affine(&a, &b).into()
            };
            let s = Sign::of(&c);
            Ok(RootIsolation {
                roots: vec![root],
                gap_signs: vec![s.negate(), s],
            })
        }
        Some(_) => Err(PolyError::MoveUnavailable),
    }
}

/// Values of `x` satisfying `lit` with every other variable fixed, under
/// the literal's current (possibly relaxed) interpretation.
pub fn feasible_set(
    lit: &Literal,
    asg: &Assignment,
    x: RealVar,
    eps_p: &Rational,
) -> Result<IntervalSet, PolyError> {
    let Some(conds) = lit.sign_conditions(eps_p) else {
        return Ok(if lit.eval(asg, eps_p)? {
            IntervalSet::full()
        } else {
            IntervalSet::empty()
        });
    };
    let p = lit.poly().expect("comparison");
    let mut acc = IntervalSet::full();
    for (shift, allowed) in conds.parts {
        let iso = restriction(p, &asg.reals, x, &shift)?;
        acc = acc.intersect(&iso.select(allowed));
    }
    Ok(acc)
}

/// Union of the literal feasible sets of `cls` for `x`.
pub fn clause_feasible_set(
    cls: &Clause,
    asg: &Assignment,
    x: RealVar,
    eps_p: &Rational,
) -> Result<IntervalSet, PolyError> {
    for lit in cls.literals.iter().filter(|l| !l.contains_var(x)) {
        if lit.eval(asg, eps_p)? {
            return Ok(IntervalSet::full());
        }
    }
    let mut acc = IntervalSet::empty();
    for lit in cls.literals.iter().filter(|l| l.contains_var(x)) {
        acc = acc.union(&feasible_set(lit, asg, x, eps_p)?);
        if acc.is_full() {
            break;
        }
    }
    Ok(acc)
}

/// For a clause over a single real variable (booleans excluded), the set of
/// values of that variable falsifying every literal.
pub fn unit_infeasible_set(cls: &Clause) -> Result<(RealVar, IntervalSet), RootError> {
    if cls.literals.iter().any(|l| l.poly().is_none()) {
        return Err(RootError::NotUnivariate);
    }
    let vars = cls.real_vars();
    let [x] = vars[..] else {
        return Err(RootError::NotUnivariate);
    };
    let zero = Rational::zero();
    let reals = vec![Value::zero(); x.index() + 1];
    let asg = Assignment {
        bools: Vec::new(),
        reals,
    };
    let mut feasible = IntervalSet::empty();
    for lit in &cls.literals {
        let plain = Literal {
            relaxed: false,
            ..lit.clone()
        };
        feasible = feasible.union(&feasible_set(&plain, &asg, x, &zero)?);
    }
    Ok((x, feasible.complement()))
}

/// A rational close to `v` from the given side, within `tol`: the simplest
/// rational strictly between `v` and `v ± tol`.
pub fn simple_rational_near(v: &Value, tol: &Rational, above: bool) -> Rational {
    use crate::numeric::simplest_rational_in;
    let shifted = |r: &Rational| -> Value {
        if above {
            Value::Rational(r + tol)
        } else {
            Value::Rational(r - tol)
        }
    };
    let anchor = match v {
        Value::Rational(r) => r.clone(),
        Value::Algebraic(a) => {
            let a = a.refine(tol);
            if above {
                a.hi().clone()
            } else {
                a.lo().clone()
            }
        }
    };
    let other = shifted(&anchor);
    let res = if above {
        simplest_rational_in(Some(v), true, Some(&other), true)
    } else {
        simplest_rational_in(Some(&other), true, Some(v), true)
    };
    res.expect("a rational lies strictly between two distinct reals")
}
