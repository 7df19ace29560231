//! Exact numbers: arbitrary-precision rationals, real algebraic numbers, and
//! the complexity preorder used to rank assignment values.

mod algebraic;
mod simplest;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use algebraic::{rational_root_in, AlgebraicNumber};
pub use simplest::{simplest_rational_between, simplest_rational_in};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("interval contains no rational number")]
    EmptyInterval,
    #[error("invalid algebraic number: {0}")]
    InvalidAlgebraic(&'static str),
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(x: &Rational) -> Sign {
        if x.is_zero() {
            Sign::Zero
        } else if x.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn from_ordering(o: Ordering) -> Sign {
        match o {
            Ordering::Less => Sign::Neg,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Pos,
        }
    }
}

/// An exact real value assigned to an arithmetic variable.
///
/// Algebraic values are always irrational; anything with a rational root is
/// normalized to `Value::Rational` at construction.
#[derive(Clone, Debug)]
pub enum Value {
    Rational(Rational),
    Algebraic(Arc<AlgebraicNumber>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Rational(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Value {
        Value::Rational(Rational::new(n.into(), d.into()))
    }

    pub fn zero() -> Value {
        Value::Rational(Rational::zero())
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Value::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Value::Rational(r) => Some(r),
            Value::Algebraic(_) => None,
        }
    }

    pub fn as_algebraic(&self) -> Option<&Arc<AlgebraicNumber>> {
        match self {
            Value::Rational(_) => None,
            Value::Algebraic(a) => Some(a),
        }
    }

    pub fn complexity(&self) -> Complexity {
        match self {
            Value::Rational(r) => Complexity::Rational(r.denom().clone()),
            Value::Algebraic(_) => Complexity::Irrational,
        }
    }

    /// Irrational, or a rational whose denominator exceeds `1/eps_v`.
    pub fn exceeds_threshold(&self, eps_v: &Rational) -> bool {
        match self {
            Value::Rational(r) => {
                Rational::from_integer(r.denom().clone()) * eps_v > Rational::one()
            }
            Value::Algebraic(_) => true,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Algebraic(a) => a.to_f64(),
        }
    }

    /// Sign of `q` evaluated at this value.
    pub fn sign_of(&self, q: &crate::poly::UnivariatePoly) -> Sign {
        match self {
            Value::Rational(r) => q.sign_at(r),
            Value::Algebraic(a) => a.sign_of(q),
        }
    }
}

impl From<Rational> for Value {
    fn from(r: Rational) -> Self {
        Value::Rational(r)
    }
}

impl From<AlgebraicNumber> for Value {
    fn from(a: AlgebraicNumber) -> Self {
        Value::Algebraic(Arc::new(a))
    }
}

/// Total order consistent with the reals.
pub fn cmp_value(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Rational(x), Value::Rational(y)) => x.cmp(y),
        (Value::Algebraic(x), Value::Rational(y)) => x.cmp_rational(y),
        (Value::Rational(x), Value::Algebraic(y)) => y.cmp_rational(x).reverse(),
        (Value::Algebraic(x), Value::Algebraic(y)) => {
            if Arc::ptr_eq(x, y) {
                Ordering::Equal
            } else {
                x.cmp_algebraic(y)
            }
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        cmp_value(self, other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_value(self, other)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{r}"),
            Value::Algebraic(a) => write!(f, "{a}"),
        }
    }
}

/// Position of a value in the complexity preorder: rationals ordered by
/// denominator, then all irrationals as one class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Complexity {
    Rational(BigInt),
    Irrational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexityOrder {
    /// Strictly simpler.
    Prec,
    /// Strictly more complex.
    Succ,
    /// Neither precedes the other.
    Sim,
}

pub fn cmp_complexity(a: &Value, b: &Value) -> ComplexityOrder {
    match a.complexity().cmp(&b.complexity()) {
        Ordering::Less => ComplexityOrder::Prec,
        Ordering::Greater => ComplexityOrder::Succ,
        Ordering::Equal => ComplexityOrder::Sim,
    }
}

/// Renders a rational as an SMT-LIB real term: `3.0`, `(- 3.0)`, `(/ 1 2)`, `(- (/ 1 2))`.
pub fn smt_rational(r: &Rational) -> String {
    let body = if r.is_integer() {
        format!("{}.0", r.numer().abs())
    } else {
        format!("(/ {} {})", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// Parses `12`, `-3`, `1.25`, `2/3`, `1e-4`, `-2.5E3`.
pub fn parse_rational(s: &str) -> Result<Rational, NumericError> {
    let err = || NumericError::Parse(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(n / d);
    }
    let (neg, t) = match t.as_bytes()[0] {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| err())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    if exp.unsigned_abs() > 4096 {
        return Err(err());
    }
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}
