//! Candidate values for literals without critical moves.

use num_traits::{One, Zero};
use rand::Rng;

use crate::formula::{Assignment, Literal};
use crate::numeric::{simplest_rational_between, Rational, Value};
use crate::poly::RealVar;
use crate::roots::{feasible_set, simple_rational_near, IntervalSet};

/// Distance from interval endpoints of the first class of candidates.
pub fn boundary_tolerance() -> Rational {
    Rational::new(1.into(), 10000.into())
}

/// Variables of `lit` whose restriction is non-constant under `reals`.
pub fn movable_vars(lit: &Literal, reals: &[Value]) -> Vec<RealVar> {
    let Some(p) = lit.poly() else {
        return Vec::new();
    };
    p.vars()
        .into_iter()
        .filter(|&x| {
            p.substitute_except(reals, x)
                .is_ok_and(|q| q.degree().unwrap_or(0) >= 1)
        })
        .collect()
}

/// Candidate values for `x` currently at `x0`, given the values `allowed`
/// by its single-variable clauses: values just inside each interval
/// endpoint together with the nearest inner integers, the adjacent integers
/// of `x0`, then three draws on each side of `x0` within a factor of two.
pub fn candidate_values<R: Rng + ?Sized>(
    x0: &Value,
    allowed: Option<&IntervalSet>,
    rng: &mut R,
) -> Vec<Value> {
    let tol = boundary_tolerance();
    let mut out: Vec<Value> = Vec::new();
    if let Some(set) = allowed {
        for iv in set.intervals() {
            let mut near_ends = Vec::with_capacity(4);
            if let Some(lo) = &iv.lo {
                let near = match lo {
                    Value::Rational(r) => r + &tol,
                    a => simple_rational_near(a, &tol, true),
                };
                let mut k = ceil(lo);
                if iv.lo_open && Value::Rational(k.clone()) == *lo {
                    k += Rational::one();
                }
                near_ends.extend([near, k]);
            }
            if let Some(hi) = &iv.hi {
                let near = match hi {
                    Value::Rational(r) => r - &tol,
                    a => simple_rational_near(a, &tol, false),
                };
                let mut k = floor(hi);
                if iv.hi_open && Value::Rational(k.clone()) == *hi {
                    k -= Rational::one();
                }
                near_ends.extend([near, k]);
            }
            out.extend(
                near_ends
                    .into_iter()
                    .map(Value::Rational)
                    .filter(|v| iv.contains(v)),
            );
        }
    }
    let below = match x0 {
        Value::Rational(r) if r.is_integer() => r - Rational::one(),
        v => floor(v),
    };
    let above = match x0 {
        Value::Rational(r) if r.is_integer() => r + Rational::one(),
        v => ceil(v),
    };
    out.push(Value::Rational(below));
    out.push(Value::Rational(above));
    let r0 = approx(x0);
    if !r0.is_zero() {
        let half = &r0 / Rational::from_integer(2.into());
        let double = &r0 * Rational::from_integer(2.into());
        for (a, b) in [(half, r0.clone()), (r0.clone(), double)] {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for _ in 0..3 {
                out.push(Value::Rational(uniform_simple(&lo, &hi, rng)));
            }
        }
    }
    let mut seen: Vec<Value> = Vec::with_capacity(out.len());
    for v in out {
        if v != *x0 && !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen
}

/// A uniform point of `(lo, hi)` rounded to the simplest rational near it.
fn uniform_simple<R: Rng + ?Sized>(lo: &Rational, hi: &Rational, rng: &mut R) -> Rational {
    const N: i64 = 1000;
    let width = hi - lo;
    let k = rng.gen_range(1..N);
    let t = lo + &width * Rational::new(k.into(), N.into());
    let delta = width / Rational::from_integer((2 * N).into());
    simplest_rational_between(Some(&(&t - &delta)), true, Some(&(&t + &delta)), true).unwrap_or(t)
}

fn floor(v: &Value) -> Rational {
    match v {
        Value::Rational(r) => r.floor(),
        Value::Algebraic(a) => {
            let mut a = (**a).clone();
            loop {
                let (l, h) = (a.lo().floor(), a.hi().floor());
                if l == h {
                    return l;
                }
                a = a.bisect();
            }
        }
    }
}

fn ceil(v: &Value) -> Rational {
    match v {
        Value::Rational(r) => r.ceil(),
        a => floor(a) + Rational::one(),
    }
}

fn approx(v: &Value) -> Rational {
    match v {
        Value::Rational(r) => r.clone(),
        Value::Algebraic(a) => {
            let a = a.refine(&Rational::new(1.into(), 1_000_000.into()));
            let m = (a.lo() + a.hi()) / Rational::from_integer(2.into());
            let d = Rational::new(1.into(), 1_000_000.into());
            simplest_rational_between(Some(&(&m - &d)), true, Some(&(&m + &d)), true).unwrap_or(m)
        }
    }
}

/// The first candidate after which some variable of `lit` has a nonempty
/// feasible set; a random candidate if there is none.
pub fn lookahead_pick<R: Rng + ?Sized>(
    lit: &Literal,
    x: RealVar,
    candidates: &[Value],
    asg: &Assignment,
    eps_p: &Rational,
    rng: &mut R,
) -> Value {
    assert!(!candidates.is_empty());
    let vars = lit.poly().map(|p| p.vars()).unwrap_or_default();
    let mut trial = asg.clone();
    for v in candidates {
        trial.reals[x.index()] = v.clone();
        if vars
            .iter()
            .any(|&y| feasible_set(lit, &trial, y, eps_p).is_ok_and(|f| !f.is_empty()))
        {
            return v.clone();
        }
    }
    candidates[rng.gen_range(0..candidates.len())].clone()
}
