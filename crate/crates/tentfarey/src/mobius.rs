//! Möbius transformations `x ↦ (ax + b)/(cx + d)` stored as 2×2 matrices.
//!
//! Every inverse branch of the map family is a Möbius transformation, and a
//! composition of branches is the product of their matrices.  Three storage
//! backends cover the regimes this crate meets in practice:
//!
//! * [`Mobius::Int`] — machine integers, exact and allocation-free while the
//!   entries fit (branch words at the endpoint parameters stay within `i64`
//!   up to useful depths);
//! * [`Mobius::Big`] — arbitrary-precision integers, the automatic promotion
//!   target once a product would overflow (deep words grow exponentially);
//! * [`Mobius::Scaled`] — binary64 entries with a separate logarithmic scale
//!   factor, for parameters where the entries are not integers; the scale is
//!   re-normalized on every composition so long products neither overflow
//!   nor underflow.
//!
//! Projective scaling leaves the transformation unchanged, so evaluation and
//! the derivative ratio `|det| / (cx + d)²` are independent of the backend;
//! only determinant queries need the tracked scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::num_util::{log_abs_bigint, ratio_to_f64};
use crate::surd::{ExactPoint, Surd};

/// A 2×2 matrix `(a b; c d)` acting on the line by `x ↦ (ax + b)/(cx + d)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Mobius {
    /// Exact machine-integer entries.
    Int {
        /// Entry `a`.
        a: i64,
        /// Entry `b`.
        b: i64,
        /// Entry `c`.
        c: i64,
        /// Entry `d`.
        d: i64,
    },
    /// Exact arbitrary-precision entries.
    Big {
        /// Entry `a`.
        a: BigInt,
        /// Entry `b`.
        b: BigInt,
        /// Entry `c`.
        c: BigInt,
        /// Entry `d`.
        d: BigInt,
    },
    /// Floating entries kept inside a safe magnitude window, with the
    /// factored-out magnitude carried in `log_scale`: the represented matrix
    /// is `e^{log_scale} · (a b; c d)`.  Rescaling happens lazily, only when
    /// an entry threatens the `f64` range, so long products stay cheap.
    Scaled {
        /// Entry `a` (windowed).
        a: f64,
        /// Entry `b` (windowed).
        b: f64,
        /// Entry `c` (windowed).
        c: f64,
        /// Entry `d` (windowed).
        d: f64,
        /// Natural log of the factored-out magnitude.
        log_scale: f64,
    },
}

impl Mobius {
    /// The identity transformation.
    #[must_use]
    pub fn identity() -> Self {
        Mobius::Int { a: 1, b: 0, c: 0, d: 1 }
    }

    /// Exact matrix from machine integers.
    #[must_use]
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mobius::Int { a, b, c, d }
    }

    /// Floating matrix; the entries are normalized immediately.
    #[must_use]
    pub fn from_f64s(a: f64, b: f64, c: f64, d: f64) -> Self {
        normalize_scaled(a, b, c, d, 0.0)
    }

    /// Composition `self ∘ rhs` as maps, i.e. the matrix product `self · rhs`.
    ///
    /// Integer backends promote automatically: machine-integer products are
    /// formed in 128-bit arithmetic and spill to arbitrary precision only
    /// when they no longer fit; any floating operand makes the result
    /// floating.
    #[must_use]
    pub fn compose(&self, rhs: &Mobius) -> Mobius {
        match (self, rhs) {
            (
                Mobius::Int { a: a1, b: b1, c: c1, d: d1 },
                Mobius::Int { a: a2, b: b2, c: c2, d: d2 },
            ) => {
                let a = *a1 as i128 * *a2 as i128 + *b1 as i128 * *c2 as i128;
                let b = *a1 as i128 * *b2 as i128 + *b1 as i128 * *d2 as i128;
                let c = *c1 as i128 * *a2 as i128 + *d1 as i128 * *c2 as i128;
                let d = *c1 as i128 * *b2 as i128 + *d1 as i128 * *d2 as i128;
                match (i64::try_from(a), i64::try_from(b), i64::try_from(c), i64::try_from(d)) {
                    (Ok(a), Ok(b), Ok(c), Ok(d)) => Mobius::Int { a, b, c, d },
                    _ => Mobius::Big {
                        a: BigInt::from(a),
                        b: BigInt::from(b),
                        c: BigInt::from(c),
                        d: BigInt::from(d),
                    },
                }
            }
            (Mobius::Scaled { .. }, _) | (_, Mobius::Scaled { .. }) => {
                let (l, ls) = self.entries_f64();
                let (r, rs) = rhs.entries_f64();
                normalize_scaled(
                    l[0] * r[0] + l[1] * r[2],
                    l[0] * r[1] + l[1] * r[3],
                    l[2] * r[0] + l[3] * r[2],
                    l[2] * r[1] + l[3] * r[3],
                    ls + rs,
                )
            }
            _ => {
                let (a1, b1, c1, d1) = self.to_big();
                let (a2, b2, c2, d2) = rhs.to_big();
                Mobius::Big {
                    a: &a1 * &a2 + &b1 * &c2,
                    b: &a1 * &b2 + &b1 * &d2,
                    c: &c1 * &a2 + &d1 * &c2,
                    d: &c1 * &b2 + &d1 * &d2,
                }
            }
        }
    }

    /// Exact entries as arbitrary-precision integers.
    ///
    /// # Panics
    ///
    /// Panics on a floating matrix, which has no exact entries.
    #[must_use]
    pub fn to_big(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        match self {
            Mobius::Int { a, b, c, d } => {
                (BigInt::from(*a), BigInt::from(*b), BigInt::from(*c), BigInt::from(*d))
            }
            Mobius::Big { a, b, c, d } => (a.clone(), b.clone(), c.clone(), d.clone()),
            Mobius::Scaled { .. } => panic!("floating matrix has no exact integer entries"),
        }
    }

    /// True when the entries are stored exactly.
    #[must_use]
    pub fn is_exact(&self) -> bool {
        !matches!(self, Mobius::Scaled { .. })
    }

    /// Entries as binary64 together with the factored-out log-magnitude, so
    /// the represented matrix is `e^{scale} · entries`.  Exact entries too
    /// large for `f64` are shifted down and the shift is returned in the
    /// scale.
    #[must_use]
    pub fn entries_f64(&self) -> ([f64; 4], f64) {
        match self {
            Mobius::Int { a, b, c, d } => ([*a as f64, *b as f64, *c as f64, *d as f64], 0.0),
            Mobius::Big { a, b, c, d } => {
                let bits = [a, b, c, d].iter().map(|e| e.bits()).max().unwrap_or(0);
                if bits <= 900 {
                    (
                        [
                            ratio_to_f64(a, &BigInt::from(1)),
                            ratio_to_f64(b, &BigInt::from(1)),
                            ratio_to_f64(c, &BigInt::from(1)),
                            ratio_to_f64(d, &BigInt::from(1)),
                        ],
                        0.0,
                    )
                } else {
                    let shift = bits - 64;
                    let down = |e: &BigInt| -> f64 {
                        let shifted = e >> shift;
                        shifted.to_string().parse().unwrap_or(0.0)
                    };
                    ([down(a), down(b), down(c), down(d)], shift as f64 * std::f64::consts::LN_2)
                }
            }
            Mobius::Scaled { a, b, c, d, log_scale } => ([*a, *b, *c, *d], *log_scale),
        }
    }

    /// The image `(ax + b)/(cx + d)` in binary64.
    #[must_use]
    pub fn eval_f64(&self, x: f64) -> f64 {
        let ([a, b, c, d], _) = self.entries_f64();
        (a * x + b) / (c * x + d)
    }

    /// The exact image of an exactly represented point.
    ///
    /// # Panics
    ///
    /// Panics on a floating matrix or when the point is a pole.
    #[must_use]
    pub fn eval_exact(&self, x: &ExactPoint) -> ExactPoint {
        let (a, b, c, d) = self.to_big();
        match x {
            ExactPoint::Rational(r) => {
                let (p, q) = (r.numer(), r.denom());
                let num = &a * p + &b * q;
                let den = &c * p + &d * q;
                assert!(!den.is_zero(), "point is a pole of the transformation");
                ExactPoint::Rational(BigRational::new(num, den))
            }
            ExactPoint::Quadratic(s) => {
                let to_surd = |v: BigInt| Surd::from_rational(&BigRational::from(v));
                let num = to_surd(a).mul(s).add(&to_surd(b));
                let den = to_surd(c).mul(s).add(&to_surd(d));
                let image = num.div(&den);
                ExactPoint::quadratic(image).expect("branch images stay inside [0, 1]")
            }
        }
    }

    /// `|f′(x)| = |det| / (cx + d)²` in binary64.  The projective scale
    /// cancels between numerator and denominator, so every backend uses its
    /// normalized entries directly.
    #[must_use]
    pub fn deriv_abs_f64(&self, x: f64) -> f64 {
        let ([a, b, c, d], _) = self.entries_f64();
        let den = c * x + d;
        (a * d - b * c).abs() / (den * den)
    }

    /// `ln |f′(x)|` at an exactly represented point, computed in the log
    /// domain so deep words (entries far beyond `f64`) lose no precision.
    ///
    /// # Panics
    ///
    /// Panics on a floating matrix.
    #[must_use]
    pub fn log_deriv_abs_exact(&self, x: &ExactPoint) -> f64 {
        let (a, b, c, d) = self.to_big();
        let log_det = log_abs_bigint(&(&a * &d - &b * &c));
        let log_den = match x {
            ExactPoint::Rational(r) => {
                // cx + d = (c·p + d·q)/q.
                let num = &c * r.numer() + &d * r.denom();
                log_abs_bigint(&num) - log_abs_bigint(r.denom())
            }
            ExactPoint::Quadratic(s) => {
                let to_surd = |v: BigInt| Surd::from_rational(&BigRational::from(v));
                to_surd(c).mul(s).add(&to_surd(d)).ln_abs()
            }
        };
        log_det - 2.0 * log_den
    }

    /// Exact determinant of an integer matrix.
    ///
    /// # Panics
    ///
    /// Panics on a floating matrix.
    #[must_use]
    pub fn det_exact(&self) -> BigInt {
        let (a, b, c, d) = self.to_big();
        &a * &d - &b * &c
    }

    /// `ln |det|` for any backend, including the tracked scale.
    #[must_use]
    pub fn log_abs_det(&self) -> f64 {
        match self {
            Mobius::Scaled { a, b, c, d, log_scale } => {
                (a * d - b * c).abs().ln() + 2.0 * log_scale
            }
            _ => log_abs_bigint(&self.det_exact()),
        }
    }
}

fn normalize_scaled(a: f64, b: f64, c: f64, d: f64, log_scale: f64) -> Mobius {
    let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    assert!(m.is_finite() && m > 0.0, "degenerate floating matrix");
    if (1e-100..=1e100).contains(&m) {
        // Still comfortably inside the f64 range: skip the rescale (and its
        // logarithm) — hot composition loops hit this branch almost always.
        Mobius::Scaled { a, b, c, d, log_scale }
    } else {
        Mobius::Scaled {
            a: a / m,
            b: b / m,
            c: c / m,
            d: d / m,
            log_scale: log_scale + m.ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn farey_zero() -> Mobius {
        Mobius::from_ints(1, 0, 1, 1)
    }

    fn farey_one() -> Mobius {
        Mobius::from_ints(0, 1, 1, 1)
    }

    #[test]
    fn two_letter_words_match_hand_compositions() {
        // f₀∘f₀ = x/(1 + 2x); f₁∘f₀ = (1 + x)/(1 + 2x).
        let w00 = farey_zero().compose(&farey_zero());
        assert_eq!(w00, Mobius::from_ints(1, 0, 2, 1));
        let w10 = farey_one().compose(&farey_zero());
        assert_eq!(w10, Mobius::from_ints(1, 1, 2, 1));
        let x = 0.3;
        assert!((w10.eval_f64(x) - (1.0 + x) / (1.0 + 2.0 * x)).abs() < 1e-15);
    }

    #[test]
    fn derivative_obeys_the_chain_rule() {
        let f0 = farey_zero();
        let f1 = farey_one();
        let composed = f1.compose(&f0);
        let x = 0.37;
        let inner = f0.eval_f64(x);
        let chained = f1.deriv_abs_f64(inner) * f0.deriv_abs_f64(x);
        assert!((composed.deriv_abs_f64(x) - chained).abs() < 1e-15);
    }

    #[test]
    fn long_products_promote_to_big_integers_losslessly() {
        // fⁿ₀ has entries (1, 0; n, 1); pure f₁-alternations grow like
        // Fibonacci and overflow i64 near length 92.
        let mut m = Mobius::identity();
        for _ in 0..120 {
            m = m.compose(&farey_one());
        }
        assert!(matches!(m, Mobius::Big { .. }));
        // Entries are consecutive Fibonacci numbers; the determinant keeps
        // absolute value one with sign (−1)^(letter count).
        assert_eq!(m.det_exact(), BigInt::one());
        let (_, b, _, _) = m.to_big();
        let mut fib = (BigInt::from(0), BigInt::from(1));
        for _ in 0..120 {
            fib = (fib.1.clone(), fib.0 + fib.1);
        }
        assert_eq!(b, fib.0, "upper-right entry is the 120th Fibonacci number");
    }

    #[test]
    fn exact_rational_evaluation_matches_floating() {
        let m = farey_one().compose(&farey_zero()).compose(&farey_zero());
        let x = ExactPoint::rational(2, 7).unwrap();
        let exact = m.eval_exact(&x);
        assert!((exact.to_f64() - m.eval_f64(2.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_surd_evaluation_matches_floating() {
        use num_bigint::BigInt;
        let m = farey_one().compose(&farey_zero());
        let s = crate::surd::Surd::new(BigInt::from(-1), BigInt::one(), BigInt::one(), 2);
        let x = ExactPoint::quadratic(s).unwrap();
        let exact = m.eval_exact(&x);
        assert!((exact.to_f64() - m.eval_f64(2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn log_derivative_agrees_with_direct_formula_at_moderate_depth() {
        let mut m = Mobius::identity();
        for letter in [0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1] {
            let step = if letter == 0 { farey_zero() } else { farey_one() };
            m = m.compose(&step);
        }
        let x = ExactPoint::rational(3, 8).unwrap();
        let direct = m.deriv_abs_f64(0.375).ln();
        assert!((m.log_deriv_abs_exact(&x) - direct).abs() < 1e-12);
    }

    #[test]
    fn scaled_backend_survives_depths_that_overflow_f64() {
        // 2000 alternating letters: Fibonacci-sized entries ≈ φ^2000 ≫ f64
        // range; the tracked scale keeps evaluation finite and correct.
        let mut m = Mobius::from_f64s(0.0, 1.0, 1.0, 1.0);
        for _ in 0..2000 {
            m = m.compose(&farey_one());
        }
        let v = m.eval_f64(0.5);
        // Quotients of consecutive Fibonacci numbers converge to 1/φ.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((v - 1.0 / phi).abs() < 1e-9);
        // Total log-magnitude ≈ 2000·ln φ, split between windowed entries
        // and the tracked scale; the bulk must live in the scale.
        let (entries, scale) = m.entries_f64();
        let max_entry = entries.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let total = scale + max_entry.ln();
        assert!((total - 2000.0 * phi.ln()).abs() < 5.0, "total magnitude {total}");
        assert!(scale > 500.0, "magnitude lives in the scale, got {scale}");
    }

    #[test]
    fn determinant_log_tracks_the_scale() {
        let m = Mobius::from_f64s(1.0, 0.0, 0.5, 1.5); // det 1.5
        let twice = m.compose(&m);
        assert!((twice.log_abs_det() - (2.25f64).ln()).abs() < 1e-12);
    }
}
