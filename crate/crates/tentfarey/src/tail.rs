//! The singular part of an operator iterate at a point.
//!
//! Pushing the observable `v(y) = |y − β|^{−α}` through `n` steps of the
//! transfer operator spreads its singularity over the branch words whose
//! cylinders touch `β`.  At depth `n` these are the coding word of `β` and
//! the words flanking its cylinder, and the *tail*
//!
//! ```text
//! v_n(x) = Σ_ω |f′_ω(x)| · |f_ω(x) − β|^{−α}
//! ```
//!
//! over that word set carries the whole divergence question: whether the
//! iterates settle depends on how fast the cylinder at `β` shrinks against
//! the power `α`.
//!
//! Two backends mirror the two regimes.  For uniformly expanding
//! parameters the cylinders shrink geometrically and plain floating point
//! is enough ([`singular_tail`]).  At the Farey endpoint the cylinder at
//! `β` shrinks like the square of a continued-fraction denominator, which
//! leaves the floating range after a few hundred digits; [`FareyTailSweep`]
//! therefore works entirely in the log domain, with big-integer branch
//! matrices from the itinerary walk and exact surd arithmetic for the
//! distance to the singularity, so depth `10⁴` (denominators of thousands
//! of digits) is routine.

use crate::cf::{CodingWalk, ContinuedFraction};
use crate::coding::neighbor_words;
use crate::error::{invalid, Result};
use crate::map::word_matrix;
use crate::num_util::log_abs_bigint;
use crate::observable::ExtendedReal;
use crate::surd::{ExactPoint, Surd};

/// Magnitude of a tail value: exactly infinite when a branch image hits
/// the singularity, otherwise the natural log of the (positive) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailMagnitude {
    /// A branch image coincides with the singularity.
    Infinite,
    /// `ln` of the finite tail value.
    Log(f64),
}

impl TailMagnitude {
    /// The log value, `None` when infinite.
    #[must_use]
    pub fn ln(&self) -> Option<f64> {
        match self {
            TailMagnitude::Infinite => None,
            TailMagnitude::Log(l) => Some(*l),
        }
    }

    /// True when the tail is exactly infinite.
    #[must_use]
    pub fn is_infinite(&self) -> bool {
        matches!(self, TailMagnitude::Infinite)
    }

    /// The value on the extended real line (`exp` may overflow to `inf`
    /// for huge logs; the infinite case is exact).
    #[must_use]
    pub fn to_extended(&self) -> ExtendedReal {
        match self {
            TailMagnitude::Infinite => ExtendedReal::PosInf,
            TailMagnitude::Log(l) => ExtendedReal::Finite(l.exp()),
        }
    }
}

/// Floating-point tail at depth `n`: the branch-word set flanking `β` is
/// read off the cylinder structure at parameter `r`, and each word
/// contributes derivative times singular value at its image of `x`.
///
/// Suitable away from the Farey endpoint, where cylinders shrink
/// geometrically; at `r = 1` prefer [`FareyTailSweep`] beyond small depth.
#[must_use]
pub fn singular_tail(r: f64, beta: f64, alpha: f64, n: u64, x: f64) -> ExtendedReal {
    let words = neighbor_words(r, beta, n);
    let mut total = ExtendedReal::Finite(0.0);
    for word in words.unique() {
        let m = word_matrix(r, word);
        let y = m.eval_f64(x);
        let dist = (y - beta).abs();
        let value = if dist == 0.0 {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(dist.powf(-alpha))
        };
        total = total.add(value.scale(m.deriv_abs_f64(x)));
    }
    total
}

/// One measurement of the exact Farey tail: the depth, the magnitude, and
/// the size data of the coding word needed to normalize it.
#[derive(Debug, Clone, Copy)]
pub struct FareyTailStep {
    /// Itinerary depth `n`.
    pub n: u64,
    /// Tail magnitude at this depth.
    pub magnitude: TailMagnitude,
    /// Ones consumed by the itinerary so far (the convergent index).
    pub ones: u64,
    /// `ln qₘ` for the current convergent denominator.
    pub log_q: f64,
}

/// Exact log-domain tail along the Farey itinerary of a singularity.
///
/// The walk follows the digit spelling of `β`'s continued fraction and
/// exposes, at any depth, the tail contribution of the coding word itself:
/// `ln|f′_ω(x)|` from the big-integer branch matrix and `ln|f_ω(x) − β|`
/// from exact surd arithmetic.  Advancing is incremental, so sweeping to
/// depth `10⁴` costs one digit step at a time and measurements may be taken
/// at any subset of depths.
#[derive(Debug, Clone)]
pub struct FareyTailSweep {
    walk: CodingWalk,
    alpha: f64,
    x: ExactPoint,
    beta: Surd,
}

impl FareyTailSweep {
    /// Starts a sweep for the singularity with the given expansion, power
    /// `α ∈ (0, 1)`, and observation point.
    ///
    /// # Errors
    ///
    /// The expansion must have an exact value (finite or periodic), `α`
    /// must lie in `(0, 1)`, and the observation point must share a
    /// quadratic field with the singularity.
    pub fn new(beta_cf: &ContinuedFraction, alpha: f64, x: ExactPoint) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
            return Err(invalid(format!("power {alpha} outside (0, 1)")));
        }
        let beta = beta_cf.value_exact()?.to_surd();
        let xs = x.to_surd();
        let compatible = beta.radicand() == 0
            || xs.radicand() == 0
            || beta.radicand() == xs.radicand();
        if !compatible {
            return Err(invalid(format!(
                "observation point lives in ℚ(√{}) but the singularity in ℚ(√{})",
                xs.radicand(),
                beta.radicand()
            )));
        }
        Ok(FareyTailSweep { walk: CodingWalk::new(beta_cf)?, alpha, x, beta })
    }

    /// Current itinerary depth.
    #[must_use]
    pub fn depth(&self) -> u64 {
        self.walk.bookkeeping().n
    }

    /// Advances the walk to the given depth (no-op when already there).
    ///
    /// # Errors
    ///
    /// The target must not lie behind the current depth; entry capacity
    /// limits propagate.
    pub fn advance_to(&mut self, n: u64) -> Result<()> {
        if n < self.depth() {
            return Err(invalid(format!(
                "sweep already at depth {}, cannot rewind to {n}",
                self.depth()
            )));
        }
        while self.depth() < n {
            self.walk.advance()?;
        }
        Ok(())
    }

    /// Measures the tail at the current depth.
    #[must_use]
    pub fn measure(&self) -> FareyTailStep {
        let book = self.walk.bookkeeping();
        let matrix = self.walk.branch_matrix();
        let image = matrix.eval_exact(&self.x).to_surd();
        let diff = image.sub(&self.beta);
        let magnitude = if diff.is_zero() {
            TailMagnitude::Infinite
        } else {
            let log_deriv = matrix.log_deriv_abs_exact(&self.x);
            TailMagnitude::Log(log_deriv - self.alpha * diff.ln_abs())
        };
        FareyTailStep {
            n: book.n,
            magnitude,
            ones: book.m,
            log_q: log_abs_bigint(self.walk.convergents().q(book.m as i64)),
        }
    }
}
