//! Exact arithmetic for points of the unit interval: arbitrary-precision
//! rationals and real quadratic surds `(a + b·√d)/c`.
//!
//! Orbits of the interval maps in this crate stay inside ℚ for rational seeds
//! and inside a fixed real quadratic field ℚ(√d) for quadratic-irrational
//! seeds, so both kinds of point admit exact iteration, exact comparison with
//! the branch boundary 1/2, and exact equality tests against a singularity
//! location.  The [`Surd`] type keeps its value in lowest terms with a
//! positive denominator; a zero radicand marks a rational value, which makes
//! structural equality coincide with equality of real numbers.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::num_util::{log_abs_bigint, log_sub_exp_abs, ratio_to_f64};

/// A real number of the form `(a + b·√d)/c` with integer `a`, `b`, `c > 0`
/// and a non-square radicand `d` (`d = 0` marks a rational value, in which
/// case `b = 0`).  The representation is kept in lowest terms, so structural
/// equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

impl Surd {
    /// Builds `(a + b·√d)/c` and normalizes the representation.
    ///
    /// # Panics
    ///
    /// Panics if `c` is zero or `d` is a perfect square other than zero (a
    /// square radicand would silently denote a rational and break the
    /// canonical-form contract).
    #[must_use]
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Self {
        assert!(!c.is_zero(), "surd denominator must be nonzero");
        if d != 0 {
            let root = d.sqrt();
            assert!(root * root != d, "radicand {d} is a perfect square; use a rational");
        }
        let mut s = Surd { a, b, c, d };
        s.normalize();
        s
    }

    /// The rational number `x` as a degenerate surd.
    #[must_use]
    pub fn from_rational(x: &BigRational) -> Self {
        Surd::new(x.numer().clone(), BigInt::zero(), x.denom().clone(), 0)
    }

    /// The integer `n` as a degenerate surd.
    #[must_use]
    pub fn from_integer(n: i64) -> Self {
        Surd::new(BigInt::from(n), BigInt::zero(), BigInt::one(), 0)
    }

    /// `√d` for a non-square radicand.
    #[must_use]
    pub fn sqrt_of(d: u64) -> Self {
        Surd::new(BigInt::zero(), BigInt::one(), BigInt::one(), d)
    }

    fn normalize(&mut self) {
        if self.b.is_zero() {
            self.d = 0;
        }
        if self.c.is_negative() {
            self.a = -std::mem::take(&mut self.a);
            self.b = -std::mem::take(&mut self.b);
            self.c = -std::mem::take(&mut self.c);
        }
        let g = self.a.gcd(&self.b).gcd(&self.c);
        if !g.is_one() && !g.is_zero() {
            self.a = &self.a / &g;
            self.b = &self.b / &g;
            self.c = &self.c / &g;
        }
    }

    /// True when the value lies in ℚ.
    #[must_use]
    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    /// The value as an exact rational, when it is one.
    #[must_use]
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    /// Radicand of the quadratic field this value lives in (`0` for ℚ).
    #[must_use]
    pub fn radicand(&self) -> u64 {
        self.d
    }

    fn common_radicand(&self, rhs: &Surd) -> u64 {
        match (self.d, rhs.d) {
            (0, d) | (d, 0) => d,
            (d1, d2) => {
                assert_eq!(d1, d2, "surd arithmetic requires a common radicand");
                d1
            }
        }
    }

    /// Sum of two values of a common quadratic field.
    #[must_use]
    pub fn add(&self, rhs: &Surd) -> Surd {
        let d = self.common_radicand(rhs);
        Surd::new(
            &self.a * &rhs.c + &rhs.a * &self.c,
            &self.b * &rhs.c + &rhs.b * &self.c,
            &self.c * &rhs.c,
            d,
        )
    }

    /// Difference `self − rhs`.
    #[must_use]
    pub fn sub(&self, rhs: &Surd) -> Surd {
        self.add(&rhs.neg())
    }

    /// Product of two values of a common quadratic field.
    #[must_use]
    pub fn mul(&self, rhs: &Surd) -> Surd {
        let d = self.common_radicand(rhs);
        let rad = BigInt::from(d);
        Surd::new(
            &self.a * &rhs.a + &self.b * &rhs.b * &rad,
            &self.a * &rhs.b + &self.b * &rhs.a,
            &self.c * &rhs.c,
            d,
        )
    }

    /// Quotient `self / rhs`.
    ///
    /// # Panics
    ///
    /// Panics if `rhs` is zero.
    #[must_use]
    pub fn div(&self, rhs: &Surd) -> Surd {
        self.mul(&rhs.inv())
    }

    /// Negation.
    #[must_use]
    pub fn neg(&self) -> Surd {
        Surd::new(-&self.a, -&self.b, self.c.clone(), self.d)
    }

    /// Multiplicative inverse `c / (a + b·√d)`, rationalized through the
    /// conjugate.
    ///
    /// # Panics
    ///
    /// Panics if the value is zero.
    #[must_use]
    pub fn inv(&self) -> Surd {
        assert!(!self.is_zero(), "cannot invert zero");
        // 1/((a + b√d)/c) = c(a − b√d)/(a² − b²d).
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        Surd::new(&self.c * &self.a, -(&self.c * &self.b), norm, self.d)
    }

    /// True for the value zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Sign of the value: `-1`, `0`, or `1`.
    #[must_use]
    pub fn signum(&self) -> i32 {
        // c > 0, so only the numerator a + b√d decides.
        let sa = sign_i32(&self.a);
        let sb = sign_i32(&self.b);
        match (sa, sb) {
            (0, s) | (s, 0) => s,
            (x, y) if x == y => x,
            _ => {
                // Opposite signs: compare a² against b²·d.
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigInt::from(self.d);
                match a2.cmp(&b2d) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => unreachable!("non-square radicand: a² ≠ b²·d"),
                }
            }
        }
    }

    /// Exact order comparison with another value of the same field.
    #[must_use]
    pub fn cmp_value(&self, rhs: &Surd) -> Ordering {
        match self.sub(rhs).signum() {
            x if x < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Exact comparison with a rational number.
    #[must_use]
    pub fn cmp_rational(&self, rhs: &BigRational) -> Ordering {
        self.cmp_value(&Surd::from_rational(rhs))
    }

    /// Largest integer not exceeding the value.
    #[must_use]
    pub fn floor(&self) -> BigInt {
        // floor((a + b√d)/c) = div_floor(a + floor(b√d), c) because c > 0 and
        // floor(y/c) = div_floor(floor(y), c) for integer c > 0.
        let floor_num = if self.b.is_zero() {
            self.a.clone()
        } else {
            let b2d = &self.b * &self.b * BigInt::from(self.d);
            let root = b2d.sqrt();
            let t = if self.b.is_positive() {
                // b√d ∈ (root, root + 1): irrational, so floor = root.
                root
            } else {
                // b√d = −√(b²d) ∈ (−root − 1, −root): floor = −root − 1.
                -root - BigInt::one()
            };
            &self.a + t
        };
        floor_num.div_floor(&self.c)
    }

    /// The value as binary64, safe for operands beyond the `f64` range.
    #[must_use]
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return ratio_to_f64(&self.a, &self.c);
        }
        // (a + b√d)/c = a/c + (b/c)·√d; evaluate each ratio with shared
        // overflow protection.
        let a_part = ratio_to_f64(&self.a, &self.c);
        let b_part = ratio_to_f64(&self.b, &self.c);
        a_part + b_part * (self.d as f64).sqrt()
    }

    /// Natural logarithm of `|value|`, computed stably even when `a` and
    /// `b·√d` nearly cancel; `NEG_INFINITY` for zero.
    #[must_use]
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_abs_quadratic_integer(&self.a, &self.b, self.d) - log_abs_bigint(&self.c)
    }

    /// Borrow of the numerator coefficients `(a, b)` and denominator `c`.
    #[must_use]
    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.c)
    }
}

fn sign_i32(x: &BigInt) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// `ln|a + b·√d|` with cancellation handled through the field norm:
/// when `a` and `b·√d` have opposite signs, `|a + b√d| = |a² − b²d| / |a − b√d|`
/// and the conjugate has no cancellation.
fn ln_abs_quadratic_integer(a: &BigInt, b: &BigInt, d: u64) -> f64 {
    if b.is_zero() {
        return log_abs_bigint(a);
    }
    if a.is_zero() {
        return log_abs_bigint(b) + 0.5 * (d as f64).ln();
    }
    let la = log_abs_bigint(a);
    let lb = log_abs_bigint(b) + 0.5 * (d as f64).ln();
    if a.is_positive() == b.is_positive() {
        crate::num_util::log_add_exp(la, lb)
    } else if (la - lb).abs() > 1.0 {
        // Far from cancellation: the direct log-domain difference is stable.
        log_sub_exp_abs(la, lb)
    } else {
        // Near-cancellation: |a + b√d| = |a² − b²d| / |a − b√d|.
        let norm = a * a - b * b * BigInt::from(d);
        let conj = crate::num_util::log_add_exp(la, lb);
        log_abs_bigint(&norm) - conj
    }
}

/// An exactly represented point of `[0, 1]`: a rational or a quadratic surd.
///
/// Orbit arithmetic for the maps of this crate closes over both variants, so
/// codings, tail evaluations, and period detection can run without rounding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExactPoint {
    /// An element of ℚ ∩ [0, 1] in lowest terms.
    Rational(BigRational),
    /// A quadratic irrational in [0, 1].
    Quadratic(Surd),
}

impl ExactPoint {
    /// Builds a rational point `num/den` in `[0, 1]`.
    ///
    /// # Errors
    ///
    /// Rejects zero denominators and values outside the unit interval.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(invalid(format!("{num}/{den} lies outside [0, 1]")));
        }
        Ok(ExactPoint::Rational(r))
    }

    /// Wraps a surd, normalizing rational values to the `Rational` variant.
    ///
    /// # Errors
    ///
    /// Rejects values outside `[0, 1]`.
    pub fn quadratic(s: Surd) -> Result<Self> {
        if s.signum() < 0 || s.cmp_rational(&BigRational::one()) == Ordering::Greater {
            return Err(invalid("surd lies outside [0, 1]"));
        }
        Ok(match s.to_rational() {
            Some(r) => ExactPoint::Rational(r),
            None => ExactPoint::Quadratic(s),
        })
    }

    /// The point as a surd (degenerate for rationals).
    #[must_use]
    pub fn to_surd(&self) -> Surd {
        match self {
            ExactPoint::Rational(r) => Surd::from_rational(r),
            ExactPoint::Quadratic(s) => s.clone(),
        }
    }

    /// Exact comparison with `1/2`.
    #[must_use]
    pub fn cmp_half(&self) -> Ordering {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        match self {
            ExactPoint::Rational(r) => r.cmp(&half),
            ExactPoint::Quadratic(s) => s.cmp_rational(&half),
        }
    }

    /// True for the exact value zero.
    #[must_use]
    pub fn is_zero(&self) -> bool {
        matches!(self, ExactPoint::Rational(r) if r.is_zero())
    }

    /// The point as binary64.
    #[must_use]
    pub fn to_f64(&self) -> f64 {
        match self {
            ExactPoint::Rational(r) => ratio_to_f64(r.numer(), r.denom()),
            ExactPoint::Quadratic(s) => s.to_f64(),
        }
    }

    /// One exact step of the Farey map: `x/(1−x)` on `[0, 1/2]`, `(1−x)/x`
    /// on `(1/2, 1]`.
    #[must_use]
    pub fn farey_step(&self) -> ExactPoint {
        let one = Surd::from_integer(1);
        let s = self.to_surd();
        let next = if self.cmp_half() != Ordering::Greater {
            s.div(&one.sub(&s))
        } else {
            one.sub(&s).div(&s)
        };
        ExactPoint::quadratic(next).expect("the Farey map preserves [0, 1]")
    }

    /// One exact step of the tent map: `2x` on `[0, 1/2]`, `2(1−x)` on
    /// `(1/2, 1]`.
    #[must_use]
    pub fn tent_step(&self) -> ExactPoint {
        let two = Surd::from_integer(2);
        let one = Surd::from_integer(1);
        let s = self.to_surd();
        let next = if self.cmp_half() != Ordering::Greater {
            two.mul(&s)
        } else {
            two.mul(&one.sub(&s))
        };
        ExactPoint::quadratic(next).expect("the tent map preserves [0, 1]")
    }
}

impl std::fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactPoint::Rational(r) => write!(f, "{r}"),
            ExactPoint::Quadratic(s) => {
                let (a, b, c) = s.parts();
                write!(f, "({a}+{b}*sqrt{})/{c}", s.radicand())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2_minus_1() -> Surd {
        Surd::new(BigInt::from(-1), BigInt::one(), BigInt::one(), 2)
    }

    #[test]
    fn normalization_reduces_and_fixes_signs() {
        let s = Surd::new(BigInt::from(-2), BigInt::from(2), BigInt::from(-4), 2);
        let (a, b, c) = s.parts();
        assert_eq!((a.clone(), b.clone(), c.clone()), (BigInt::from(1), BigInt::from(-1), BigInt::from(2)));
    }

    #[test]
    fn rational_surds_are_canonical_across_radicands() {
        let half_dummy2 = Surd::new(BigInt::one(), BigInt::zero(), BigInt::from(2), 2);
        let half_dummy3 = Surd::new(BigInt::one(), BigInt::zero(), BigInt::from(2), 3);
        assert_eq!(half_dummy2, half_dummy3);
        assert!(half_dummy2.is_rational());
    }

    #[test]
    fn field_arithmetic_reproduces_known_identities() {
        let x = sqrt2_minus_1(); // √2 − 1 ≈ 0.41421
        // (√2 − 1)(√2 + 1) = 1.
        let conj = Surd::new(BigInt::one(), BigInt::one(), BigInt::one(), 2);
        assert_eq!(x.mul(&conj), Surd::from_integer(1));
        // 1/(√2 − 1) = √2 + 1.
        assert_eq!(x.inv(), conj);
        // x + x = 2√2 − 2.
        let double = Surd::new(BigInt::from(-2), BigInt::from(2), BigInt::one(), 2);
        assert_eq!(x.add(&x), double);
    }

    #[test]
    fn sign_analysis_handles_mixed_sign_numerators() {
        // 3 − 2√2 > 0 (≈ 0.1716), 2 − 2√2 < 0.
        assert_eq!(Surd::new(BigInt::from(3), BigInt::from(-2), BigInt::one(), 2).signum(), 1);
        assert_eq!(Surd::new(BigInt::from(2), BigInt::from(-2), BigInt::one(), 2).signum(), -1);
        assert_eq!(Surd::from_integer(0).signum(), 0);
    }

    #[test]
    fn floor_matches_f64_for_moderate_values() {
        for (a, b, c) in [(0i64, 1i64, 1i64), (-1, 1, 1), (5, 3, 2), (-7, 2, 3), (1, -1, 1)] {
            let s = Surd::new(BigInt::from(a), BigInt::from(b), BigInt::from(c), 2);
            let expected = s.to_f64().floor() as i64;
            assert_eq!(s.floor(), BigInt::from(expected), "({a}+{b}√2)/{c}");
        }
    }

    #[test]
    fn log_of_near_cancelling_surd_stays_accurate() {
        // (√2 − 1)^10 = 3363 − 2378·√2 ≈ 1.4866e−4: heavy cancellation.
        let x = Surd::new(BigInt::from(3363), BigInt::from(-2378), BigInt::one(), 2);
        let exact = (2f64.sqrt() - 1.0).powi(10).ln();
        assert!((x.ln_abs() - exact).abs() < 1e-16 * exact.abs() + 1e-12);
    }

    #[test]
    fn farey_orbit_of_sqrt2_minus_1_has_period_two() {
        // √2 − 1 < 1/2 maps to √2/2; √2/2 > 1/2 maps back to √2 − 1.
        let x = ExactPoint::quadratic(sqrt2_minus_1()).unwrap();
        let y = x.farey_step();
        let expected = ExactPoint::quadratic(Surd::new(BigInt::zero(), BigInt::one(), BigInt::from(2), 2)).unwrap();
        assert_eq!(y, expected);
        assert_eq!(y.farey_step(), x);
    }

    #[test]
    fn rational_farey_orbit_follows_the_euclidean_pattern() {
        // 2/3 → 1/2 → 1 → 0 → 0.
        let mut x = ExactPoint::rational(2, 3).unwrap();
        let expected = [(1i64, 2i64), (1, 1), (0, 1), (0, 1)];
        for (num, den) in expected {
            x = x.farey_step();
            assert_eq!(x, ExactPoint::rational(num, den).unwrap());
        }
    }

    #[test]
    fn tent_orbit_doubles_and_reflects_exactly() {
        let mut x = ExactPoint::rational(3, 10).unwrap();
        x = x.tent_step();
        assert_eq!(x, ExactPoint::rational(3, 5).unwrap());
        x = x.tent_step();
        assert_eq!(x, ExactPoint::rational(4, 5).unwrap());
        x = x.tent_step();
        assert_eq!(x, ExactPoint::rational(2, 5).unwrap());
    }
}
