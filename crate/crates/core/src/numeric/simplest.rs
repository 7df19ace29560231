//! Simplest rational (smallest denominator, then smallest magnitude) inside an interval.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{AlgebraicNumber, NumericError, Rational, Value};

/// Simplest rational in the interval with rational (or infinite, `None`)
/// endpoints. Returns `None` when the interval is empty.
pub fn simplest_rational_between(
    lo: Option<&Rational>,
    lo_open: bool,
    hi: Option<&Rational>,
    hi_open: bool,
) -> Option<Rational> {
    if let (Some(l), Some(h)) = (lo, hi) {
        match l.cmp(h) {
            Ordering::Greater => return None,
            Ordering::Equal if lo_open || hi_open => return None,
            _ => {}
        }
    }
    let zero = Rational::zero();
    let above_lo = lo.is_none_or(|l| *l < zero || (l.is_zero() && !lo_open));
    let below_hi = hi.is_none_or(|h| *h > zero || (h.is_zero() && !hi_open));
    if above_lo && below_hi {
        return Some(zero);
    }
    if let Some(h) = hi.filter(|h| !h.is_positive()) {
        let neg_lo = lo.map(|l| -l);
        return Some(-simplest_positive(-h, hi_open, neg_lo, lo_open));
    }
    Some(simplest_positive(
        lo.expect("bounded below").clone(),
        lo_open,
        hi.cloned(),
        hi_open,
    ))
}

/// Interval is nonempty, lies in `[0, inf)` and excludes zero.
///
/// Expands the continued fraction on coprime integer pairs, so no step
/// needs a gcd.
fn simplest_positive(lo: Rational, lo_open: bool, hi: Option<Rational>, hi_open: bool) -> Rational {
    let (mut ln, mut ld) = (lo.numer().clone(), lo.denom().clone());
    let mut lo_open = lo_open;
    let mut hi: Option<(BigInt, BigInt)> = hi.map(|h| (h.numer().clone(), h.denom().clone()));
    let mut hi_open = hi_open;
    let mut terms: Vec<BigInt> = Vec::new();
    loop {
        let (floor, rem) = ln.div_mod_floor(&ld);
        let first_int = if rem.is_zero() && !lo_open {
            floor.clone()
        } else {
            &floor + 1u32
        };
        let fits = match &hi {
            None => true,
            Some((hn, hd)) => {
                let lhs = &first_int * hd;
                lhs < *hn || (lhs == *hn && !hi_open)
            }
        };
        if fits {
            terms.push(first_int);
            break;
        }
        let (hn, hd) = hi.take().expect("bounded above when no integer fits");
        // new interval: (1 / (hi - floor), 1 / (lo - floor)), ends swapped
        let gap = hn - &floor * &hd;
        let new_lo = (hd, gap);
        hi = (!rem.is_zero()).then(|| (ld.clone(), rem));
        (ln, ld) = new_lo;
        std::mem::swap(&mut lo_open, &mut hi_open);
        terms.push(floor);
    }
    let mut p = terms.pop().expect("at least one term");
    let mut q = BigInt::one();
    while let Some(t) = terms.pop() {
        let np = &t * &p + &q;
        q = p;
        p = np;
    }
    Rational::new_raw(p, q)
}

/// Simplest rational in an interval whose endpoints may be algebraic.
///
/// Fails with [`NumericError::EmptyInterval`] if no rational lies inside.
pub fn simplest_rational_in(
    lo: Option<&Value>,
    lo_open: bool,
    hi: Option<&Value>,
    hi_open: bool,
) -> Result<Rational, NumericError> {
    if let (Some(l), Some(h)) = (lo, hi) {
        match l.cmp(h) {
            Ordering::Greater => return Err(NumericError::EmptyInterval),
            Ordering::Equal if lo_open || hi_open || !l.is_rational() => {
                return Err(NumericError::EmptyInterval)
            }
            _ => {}
        }
    }
    let lo_alg = lo.and_then(Value::as_algebraic);
    let hi_alg = hi.and_then(Value::as_algebraic);
    if lo_alg.is_none() && hi_alg.is_none() {
        return simplest_rational_between(
            lo.and_then(Value::as_rational),
            lo_open,
            hi.and_then(Value::as_rational),
            hi_open,
        )
        .ok_or(NumericError::EmptyInterval);
    }

    // Some rational strictly inside, giving a denominator bound `d`.
    let inner_lo: Option<(Rational, bool)> = match lo {
        None => None,
        Some(Value::Rational(r)) => Some((r.clone(), lo_open)),
        Some(Value::Algebraic(a)) => {
            let mut a = (**a).clone();
            while !below_upper(a.hi(), hi, hi_open) {
                a = a.bisect();
            }
            Some((a.hi().clone(), false))
        }
    };
    let inner_hi: Option<(Rational, bool)> = match hi {
        None => None,
        Some(Value::Rational(r)) => Some((r.clone(), hi_open)),
        Some(Value::Algebraic(b)) => {
            let mut b = (**b).clone();
            while !above_lower(b.lo(), inner_lo.as_ref()) {
                b = b.bisect();
            }
            Some((b.lo().clone(), false))
        }
    };
    let witness = simplest_rational_between(
        inner_lo.as_ref().map(|b| &b.0),
        inner_lo.as_ref().is_some_and(|b| b.1),
        inner_hi.as_ref().map(|b| &b.0),
        inner_hi.as_ref().is_some_and(|b| b.1),
    )
    .ok_or(NumericError::EmptyInterval)?;
    let d = witness.denom().clone();

    // Snap algebraic endpoints to rationals without changing which rationals
    // of denominator <= d lie inside.
    let gap = Rational::from_integer(&d * &d).recip();
    let snap = |a: &AlgebraicNumber, lower: bool| -> Rational {
        let mut a = a.clone();
        while a.width() >= gap {
            a = a.bisect();
        }
        let s =
            simplest_rational_between(Some(a.lo()), true, Some(a.hi()), true).expect("nonempty");
        let s_inside = if lower {
            a.cmp_rational(&s) == Ordering::Greater
        } else {
            a.cmp_rational(&s) == Ordering::Less
        };
        if s.denom() <= &d && s_inside {
            s
        } else if lower {
            a.lo().clone()
        } else {
            a.hi().clone()
        }
    };
    let (new_lo, new_lo_open) = match lo {
        None => (None, false),
        Some(Value::Rational(r)) => (Some(r.clone()), lo_open),
        Some(Value::Algebraic(a)) => (Some(snap(a, true)), true),
    };
    let (new_hi, new_hi_open) = match hi {
        None => (None, false),
        Some(Value::Rational(r)) => (Some(r.clone()), hi_open),
        Some(Value::Algebraic(b)) => (Some(snap(b, false)), true),
    };
    simplest_rational_between(new_lo.as_ref(), new_lo_open, new_hi.as_ref(), new_hi_open)
        .ok_or(NumericError::EmptyInterval)
}

fn below_upper(x: &Rational, hi: Option<&Value>, hi_open: bool) -> bool {
    match hi {
        None => true,
        Some(Value::Rational(h)) => x < h || (x == h && !hi_open),
        Some(Value::Algebraic(b)) => b.cmp_rational(x) == Ordering::Greater,
    }
}

fn above_lower(x: &Rational, lo: Option<&(Rational, bool)>) -> bool {
    match lo {
        None => true,
        Some((l, open)) => x > l || (x == l && !open),
    }
}
