use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{simplest_rational_between, NumericError, Rational, Sign};
use crate::poly::univariate::{sign_variations_at, sign_variations_at_infinity, UnivariatePoly};

/// An irrational real root of `minpoly`, identified by an isolating interval.
///
/// Invariants: `minpoly` is square-free, primitive with integer coefficients,
/// of degree at least two; it has exactly one root in the open interval
/// `(lo, hi)`, that root is irrational, and neither endpoint is a root.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    minpoly: UnivariatePoly,
    lo: Rational,
    hi: Rational,
}

impl AlgebraicNumber {
    pub fn new(minpoly: UnivariatePoly, lo: Rational, hi: Rational) -> Result<Self, NumericError> {
        if minpoly.degree().unwrap_or(0) < 2 {
            return Err(NumericError::InvalidAlgebraic(
                "minimal polynomial must have degree at least two",
            ));
        }
        if lo >= hi {
            return Err(NumericError::InvalidAlgebraic("empty isolating interval"));
        }
        let m = minpoly.square_free().primitive();
        if m.sign_at(&lo) == Sign::Zero || m.sign_at(&hi) == Sign::Zero {
            return Err(NumericError::InvalidAlgebraic(
                "interval endpoint is a root",
            ));
        }
        if count_roots(&m, &lo, &hi) != 1 {
            return Err(NumericError::InvalidAlgebraic(
                "interval does not isolate exactly one root",
            ));
        }
        if m.degree() == Some(1) || rational_root_in(&m, &lo, &hi).is_some() {
            return Err(NumericError::InvalidAlgebraic("root is rational"));
        }
        Ok(Self { minpoly: m, lo, hi })
    }

    /// Caller guarantees every invariant of the type.
    pub(crate) fn from_parts(minpoly: UnivariatePoly, lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo < hi);
        Self { minpoly, lo, hi }
    }

    pub fn minpoly(&self) -> &UnivariatePoly {
        &self.minpoly
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// One bisection step.
    pub fn bisect(&self) -> Self {
        let mid = (&self.lo + &self.hi) / Rational::from_integer(2.into());
        let s_mid = self.minpoly.sign_at(&mid);
        debug_assert_ne!(s_mid, Sign::Zero, "algebraic numbers are irrational");
        if s_mid == self.minpoly.sign_at(&self.lo) {
            Self::from_parts(self.minpoly.clone(), mid, self.hi.clone())
        } else {
            Self::from_parts(self.minpoly.clone(), self.lo.clone(), mid)
        }
    }

    /// Same number with an isolating interval no wider than `width`.
    pub fn refine(&self, width: &Rational) -> Self {
        assert!(width.is_positive(), "refinement width must be positive");
        let mut cur = self.clone();
        while cur.width() > *width {
            cur = cur.bisect();
        }
        cur
    }

    /// Sign of `q(alpha)`.
    pub fn sign_of(&self, q: &UnivariatePoly) -> Sign {
        let r = q.rem(&self.minpoly);
        if r.is_constant() {
            return Sign::of(&r.coeff(0));
        }
        let g = self.minpoly.gcd(&r);
        if g.degree().unwrap_or(0) >= 1 && count_roots(&g, &self.lo, &self.hi) >= 1 {
            return Sign::Zero;
        }
        let seq = r.sturm_sequence();
        let mut cur = self.clone();
        loop {
            let s_lo = r.sign_at(&cur.lo);
            if s_lo != Sign::Zero
                && r.sign_at(&cur.hi) != Sign::Zero
                && sign_variations_at(&seq, &cur.lo) == sign_variations_at(&seq, &cur.hi)
            {
                return s_lo;
            }
            cur = cur.bisect();
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        if *r <= self.lo {
            return Ordering::Greater;
        }
        if *r >= self.hi {
            return Ordering::Less;
        }
        let s_r = self.minpoly.sign_at(r);
        if s_r == Sign::Zero {
            // Unreachable for well-formed values: the isolated root is irrational.
            return Ordering::Equal;
        }
        if s_r == self.minpoly.sign_at(&self.lo) {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub fn cmp_algebraic(&self, other: &AlgebraicNumber) -> Ordering {
        let mut a = self.clone();
        let mut b = other.clone();
        let mut checked_equal = false;
        loop {
            if a.hi <= b.lo {
                return Ordering::Less;
            }
            if b.hi <= a.lo {
                return Ordering::Greater;
            }
            if !checked_equal {
                checked_equal = true;
                let g = a.minpoly.gcd(&b.minpoly);
                if g.degree().unwrap_or(0) >= 1 {
                    let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
                    let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
                    if lo < hi && count_roots(&g, lo, hi) >= 1 {
                        return Ordering::Equal;
                    }
                }
            }
            if a.width() >= b.width() {
                a = a.bisect();
            } else {
                b = b.bisect();
            }
        }
    }

    /// `a * self + b` for nonzero rational `a`.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Self {
        assert!(!a.is_zero(), "affine image needs a nonzero scale");
        let inv = a.recip();
        let m = self.minpoly.compose_affine(&inv, &(-b * &inv)).primitive();
        let x = a * &self.lo + b;
        let y = a * &self.hi + b;
        if x < y {
            Self::from_parts(m, x, y)
        } else {
            Self::from_parts(m, y, x)
        }
    }

    /// 1-based position of this root among all real roots of the minimal polynomial.
    pub fn root_index(&self) -> usize {
        let seq = self.minpoly.sturm_sequence();
        sign_variations_at_infinity(&seq, false) - sign_variations_at(&seq, &self.lo) + 1
    }

    pub fn to_f64(&self) -> f64 {
        let scale = self.lo.abs().max(self.hi.abs()).max(Rational::one());
        let width = scale * Rational::new(1.into(), num_bigint::BigInt::from(1u64 << 53));
        let r = self.refine(&width);
        ((&r.lo + &r.hi) / Rational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(root-obj {} {})", self.minpoly, self.root_index())
    }
}

/// Distinct roots of `p` in `(lo, hi)`; neither endpoint may be a root.
pub(crate) fn count_roots(p: &UnivariatePoly, lo: &Rational, hi: &Rational) -> usize {
    let seq = p.sturm_sequence();
    sign_variations_at(&seq, lo).saturating_sub(sign_variations_at(&seq, hi))
}

/// The single root of square-free `m` inside `(lo, hi)` if that root is
/// rational. Requires exactly one root in the interval and nonroot endpoints.
pub fn rational_root_in(m: &UnivariatePoly, lo: &Rational, hi: &Rational) -> Option<Rational> {
    if m.degree() == Some(1) {
        return Some(-m.coeff(0) / m.coeff(1));
    }
    if m.degree() == Some(2) {
        return quadratic_rational_root(m, lo, hi);
    }
    let guess = simplest_rational_between(Some(lo), true, Some(hi), true)?;
    if m.sign_at(&guess) == Sign::Zero {
        return Some(guess);
    }
    // A rational root a/b has b | lc for the primitive form; two such
    // rationals differ by at least 1/lc^2.
    let p = m.primitive();
    let lc = p.leading().unwrap().abs();
    let gap = (&lc * &lc).recip();
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let s_lo = p.sign_at(&lo);
    let two = Rational::from_integer(2.into());
    while &hi - &lo >= gap {
        let mid = (&lo + &hi) / &two;
        let s = p.sign_at(&mid);
        if s == Sign::Zero {
            return Some(mid);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cand = simplest_rational_between(Some(&lo), true, Some(&hi), true)?;
    (p.sign_at(&cand) == Sign::Zero).then_some(cand)
}

fn quadratic_rational_root(m: &UnivariatePoly, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let p = m.primitive();
    let (a, b, c) = (p.coeff(2), p.coeff(1), p.coeff(0));
    let disc = (&b * &b - Rational::from_integer(4.into()) * &a * &c).to_integer();
    if disc.is_negative() {
        return None;
    }
    let root = disc.sqrt();
    if &root * &root != disc {
        return None;
    }
    let two_a = Rational::from_integer(2.into()) * &a;
    let root = Rational::from_integer(root);
    [(-&b - &root) / &two_a, (-&b + &root) / &two_a]
        .into_iter()
        .find(|r| r > lo && r < hi)
}
