//! Bounded-variation accounting for piecewise-monotone functions on the
//! unit interval.
//!
//! The functions whose variation this crate needs — indicator blocks,
//! one-step images under the first-return operator, the induced-observable
//! table — are all piecewise monotone with known turning points.  Such a
//! function is fully described, for norm purposes, by its monotone segments
//! and their one-sided endpoint values: interior variation is the endpoint
//! difference, extremes sit at endpoints, and jumps appear where adjacent
//! values disagree.  [`BvProfile`] records exactly that and computes
//! `sup |f|`, the total variation of the zero-extended function over
//! `[0, 1]`, and their sum, the norm used by the decay estimates here.
//!
//! Conventions: the function is zero off its segments; a segment boundary in
//! the open interval contributes its jump, while the endpoints `0` and `1`
//! contribute none (values there are function values, not jumps to the
//! outside).  Under these rules the indicator of `[1/2, 1]` has supremum
//! `1`, variation `1`, and norm `2`.

use crate::error::{invalid, Result};

/// One maximal interval of monotonicity: on `[lo, hi]` the function runs
/// monotonically from the one-sided value `v_lo` to `v_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    /// Left endpoint.
    pub lo: f64,
    /// Right endpoint.
    pub hi: f64,
    /// Value (right limit) at `lo`.
    pub v_lo: f64,
    /// Value (left limit) at `hi`.
    pub v_hi: f64,
}

/// A piecewise-monotone function on `[0, 1]` described by its segments,
/// zero elsewhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BvProfile {
    segments: Vec<MonotoneSegment>,
}

impl BvProfile {
    /// Builds a profile from segments sorted by position.
    ///
    /// # Errors
    ///
    /// Rejects segments outside `[0, 1]`, reversed, overlapping, or out of
    /// order (touching endpoints are fine).
    pub fn new(segments: Vec<MonotoneSegment>) -> Result<Self> {
        for s in &segments {
            if !(0.0..=1.0).contains(&s.lo) || !(0.0..=1.0).contains(&s.hi) || s.lo >= s.hi {
                return Err(invalid(format!("bad segment [{}, {}]", s.lo, s.hi)));
            }
            if !(s.v_lo.is_finite() && s.v_hi.is_finite()) {
                return Err(invalid("segment values must be finite"));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].lo < pair[0].hi {
                return Err(invalid(format!(
                    "segments overlap near {}",
                    pair[0].hi
                )));
            }
        }
        Ok(BvProfile { segments })
    }

    /// The segments, in order.
    #[must_use]
    pub fn segments(&self) -> &[MonotoneSegment] {
        &self.segments
    }

    /// `sup |f|` over `[0, 1]` of the zero-extended function.
    #[must_use]
    pub fn sup_abs(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| [s.v_lo.abs(), s.v_hi.abs()])
            .fold(0.0, f64::max)
    }

    /// Variation contributed inside the segments only: the sum of the
    /// monotone endpoint differences, with no jump terms.
    #[must_use]
    pub fn interior_variation(&self) -> f64 {
        self.segments.iter().map(|s| (s.v_hi - s.v_lo).abs()).sum()
    }

    /// Total variation over `[0, 1]` of the zero-extended function: interior
    /// variation plus every jump strictly inside the open interval,
    /// including jumps to and from the zero level at support edges.
    #[must_use]
    pub fn variation(&self) -> f64 {
        let mut total = self.interior_variation();
        let mut prev: Option<&MonotoneSegment> = None;
        for s in &self.segments {
            match prev {
                None => {
                    if s.lo > 0.0 {
                        total += s.v_lo.abs();
                    }
                }
                Some(p) if s.lo > p.hi => {
                    // A zero-level gap: down-jump leaving the previous
                    // segment, up-jump entering this one.
                    total += p.v_hi.abs() + s.v_lo.abs();
                }
                Some(p) => {
                    total += (s.v_lo - p.v_hi).abs();
                }
            }
            prev = Some(s);
        }
        if let Some(p) = prev {
            if p.hi < 1.0 {
                total += p.v_hi.abs();
            }
        }
        total
    }

    /// The norm `sup |f| + Var f` of the zero-extended function.
    #[must_use]
    pub fn bv_norm(&self) -> f64 {
        self.sup_abs() + self.variation()
    }
}
