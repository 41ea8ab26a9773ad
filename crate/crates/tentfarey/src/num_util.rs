//! Small numeric helpers: big-integer logarithms, scaled conversions to
//! binary64, compensated summation, and log-domain accumulation.
//!
//! Several quantities in this crate (continued-fraction denominators, composed
//! branch coefficients) grow far beyond the binary64 range while only their
//! logarithms are needed.  The helpers here extract logarithms and scaled
//! floating-point images directly from the big-integer representation instead
//! of round-tripping through `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Natural logarithm of `|x|`, exact to full `f64` precision for any size of
/// big integer.  Returns `f64::NEG_INFINITY` for zero.
#[must_use]
pub fn log_abs_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1023 {
        // Fits comfortably in f64 range.
        return x.abs().to_f64().expect("within f64 range").ln();
    }
    // Keep the top 128 bits as the mantissa and account for the shift.
    let shift = bits - 128;
    let top: BigInt = x.abs() >> shift;
    let mantissa = top.to_f64().expect("128-bit value fits f64 range");
    mantissa.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural logarithm of `|x|` for a rational number; `NEG_INFINITY` for zero.
#[must_use]
pub fn log_abs_ratio(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    log_abs_bigint(x.numer()) - log_abs_bigint(x.denom())
}

/// Converts a big-integer ratio `num/den` to `f64`, scaling both sides in
/// tandem so that intermediate conversions cannot overflow even when the
/// operands exceed the binary64 range.
#[must_use]
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let bits = num.bits().max(den.bits());
    if bits <= 900 {
        let n = num.to_f64().expect("within f64 range");
        let d = den.to_f64().expect("within f64 range");
        return n / d;
    }
    let shift = bits - 500;
    let n = (num >> shift).to_f64().expect("shifted value fits");
    let d = (den >> shift).to_f64().expect("shifted value fits");
    n / d
}

/// `ln(e^a + e^b)` computed without overflow; tolerates infinite inputs.
#[must_use]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln|e^a − e^b|` for `a ≠ b`; `NEG_INFINITY` when the difference vanishes.
#[must_use]
pub fn log_sub_exp_abs(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    // e^hi − e^lo = e^hi (1 − e^(lo−hi)).
    hi + (-(lo - hi).exp()).ln_1p()
}

/// Kahan–Neumaier compensated accumulator for long sums whose result must be
/// accurate to near machine precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    /// Fresh accumulator at zero.
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    #[must_use]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Least-squares slope of `y` against `x`; the caller guarantees at least two
/// distinct abscissae.
#[must_use]
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(x, y) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
