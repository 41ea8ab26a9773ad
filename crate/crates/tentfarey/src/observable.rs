//! Observables fed to the transfer operators, including ones with
//! power-law singularities, and the extended real line their values live on.
//!
//! The central example is `v(x) = |x − β|^{−α}` with `α ∈ (0, 1)`: Lebesgue
//! integrable, but pointwise infinite at `β`, and the engine of the
//! convergence/divergence dichotomies this crate reproduces.  Evaluation
//! therefore returns [`ExtendedReal`], which is either a finite binary64 or
//! the symbolic `+∞` that an exact hit of the singularity produces.
//!
//! [`Observable`] is deliberately small: singular powers (with the
//! singularity location carried exactly when known), interval indicators,
//! and piecewise-linear profiles; the batch surface parses the textual
//! forms `power:beta=…,alpha=…[,scale=…]` and `indicator:[lo,hi]`.

use std::fmt;

use crate::cf::parse_exact_value;
use crate::error::{invalid, Result};
use crate::surd::ExactPoint;

/// A nonnegative extended real: finite, or positively infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    /// An ordinary finite value.
    Finite(f64),
    /// The symbolic `+∞` (an exact singular hit, an infinite-mass integral).
    PosInf,
}

impl ExtendedReal {
    /// The value as binary64 (`+∞` maps to `f64::INFINITY`).
    #[must_use]
    pub fn as_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => *v,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    /// True for the infinite value.
    #[must_use]
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::PosInf)
    }

    /// Adds, with `+∞` absorbing.
    #[must_use]
    pub fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInf,
        }
    }

    /// Scales by a strictly positive finite weight (which leaves `+∞`
    /// infinite).
    #[must_use]
    pub fn scale(self, w: f64) -> ExtendedReal {
        debug_assert!(w > 0.0 && w.is_finite(), "weights must be positive, got {w}");
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(w * v),
            ExtendedReal::PosInf => ExtendedReal::PosInf,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInf => write!(f, "inf"),
        }
    }
}

/// A function on the unit interval that the operators can iterate.
#[derive(Debug, Clone)]
pub enum Observable {
    /// `scale · |x − β|^{−α}` with `α ∈ (0, 1)`; pointwise `+∞` at `β`.
    SingularPower {
        /// Singularity location as binary64.
        beta: f64,
        /// Exact singularity location, when the point is exactly known.
        beta_exact: Option<ExactPoint>,
        /// Singularity exponent in `(0, 1)`.
        alpha: f64,
        /// Constant prefactor.
        scale: f64,
    },
    /// The indicator of `[lo, hi]`.
    Indicator {
        /// Left endpoint.
        lo: f64,
        /// Right endpoint.
        hi: f64,
    },
    /// Linear interpolation through sorted nodes, zero outside their span.
    PiecewiseLinear {
        /// `(x, value)` nodes with strictly increasing `x`.
        nodes: Vec<(f64, f64)>,
    },
}

impl Observable {
    /// A singular power with exactly known singularity location.
    ///
    /// # Errors
    ///
    /// Requires `α ∈ (0, 1)` and a nonzero scale.
    pub fn singular(beta: ExactPoint, alpha: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
        }
        if scale <= 0.0 || !scale.is_finite() {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        Ok(Observable::SingularPower {
            beta: beta.to_f64(),
            beta_exact: Some(beta),
            alpha,
            scale,
        })
    }

    /// The indicator of `[lo, hi] ⊆ [0, 1]`.
    ///
    /// # Errors
    ///
    /// Requires `0 ≤ lo < hi ≤ 1`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(invalid(format!("bad indicator interval [{lo}, {hi}]")));
        }
        Ok(Observable::Indicator { lo, hi })
    }

    /// A piecewise-linear profile through the given nodes.
    ///
    /// # Errors
    ///
    /// Requires at least two nodes with strictly increasing positions in
    /// `[0, 1]` and finite values.
    pub fn piecewise_linear(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("need at least two nodes"));
        }
        for pair in nodes.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(invalid("node positions must be strictly increasing"));
            }
        }
        if nodes
            .iter()
            .any(|(x, v)| !(0.0..=1.0).contains(x) || !v.is_finite())
        {
            return Err(invalid("nodes must lie in [0, 1] with finite values"));
        }
        Ok(Observable::PiecewiseLinear { nodes })
    }

    /// Pointwise evaluation.
    #[must_use]
    pub fn eval(&self, x: f64) -> ExtendedReal {
        match self {
            Observable::SingularPower { beta, alpha, scale, .. } => {
                let d = (x - beta).abs();
                if d == 0.0 {
                    ExtendedReal::PosInf
                } else {
                    ExtendedReal::Finite(scale * d.powf(-alpha))
                }
            }
            Observable::Indicator { lo, hi } => {
                ExtendedReal::Finite(f64::from(u8::from(x >= *lo && x <= *hi)))
            }
            Observable::PiecewiseLinear { nodes } => {
                let first = nodes[0].0;
                let last = nodes[nodes.len() - 1].0;
                if x < first || x > last {
                    return ExtendedReal::Finite(0.0);
                }
                let idx = nodes.partition_point(|(p, _)| *p <= x);
                if idx == nodes.len() {
                    return ExtendedReal::Finite(nodes[nodes.len() - 1].1);
                }
                let (x0, v0) = nodes[idx - 1];
                let (x1, v1) = nodes[idx];
                let t = (x - x0) / (x1 - x0);
                ExtendedReal::Finite(v0 + t * (v1 - v0))
            }
        }
    }

    /// Evaluation collapsed to binary64 (`+∞` as `f64::INFINITY`).
    #[must_use]
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval(x).as_f64()
    }

    /// The Lebesgue integral over `[0, 1]`, in closed form.
    #[must_use]
    pub fn integral_lebesgue(&self) -> f64 {
        match self {
            Observable::SingularPower { beta, alpha, scale, .. } => {
                let p = 1.0 - alpha;
                scale * (beta.powf(p) + (1.0 - beta).powf(p)) / p
            }
            Observable::Indicator { lo, hi } => hi - lo,
            Observable::PiecewiseLinear { nodes } => nodes
                .windows(2)
                .map(|w| 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0))
                .sum(),
        }
    }

    /// Parses the batch-surface forms `power:beta=…,alpha=…[,scale=…]`,
    /// `indicator:[lo,hi]`, and `linear:x0,v0;x1,v1;…` (point syntax as in
    /// [`crate::cf::parse_exact_value`] wherever a position appears).
    ///
    /// # Errors
    ///
    /// Rejects unknown forms and malformed fields.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("power:") {
            let mut beta: Option<ExactPoint> = None;
            let mut alpha: Option<f64> = None;
            let mut scale = 1.0f64;
            for field in body.split(',') {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| invalid(format!("expected key=value, got {field:?}")))?;
                match key.trim() {
                    "beta" => beta = Some(parse_exact_value(value)?),
                    "alpha" => {
                        alpha = Some(
                            value.trim().parse().map_err(|_| invalid("bad alpha"))?,
                        );
                    }
                    "scale" => {
                        scale = value.trim().parse().map_err(|_| invalid("bad scale"))?;
                    }
                    other => return Err(invalid(format!("unknown field {other:?}"))),
                }
            }
            let beta = beta.ok_or_else(|| invalid("power observable needs beta=…"))?;
            let alpha = alpha.ok_or_else(|| invalid("power observable needs alpha=…"))?;
            return Observable::singular(beta, alpha, scale);
        }
        if let Some(body) = s.strip_prefix("indicator:") {
            let inner = body
                .trim()
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| invalid(format!("expected indicator:[lo,hi], got {s:?}")))?;
            let (lo, hi) = inner
                .split_once(',')
                .ok_or_else(|| invalid("expected two endpoints"))?;
            let lo = parse_exact_value(lo)?.to_f64();
            let hi = parse_exact_value(hi)?.to_f64();
            return Observable::indicator(lo, hi);
        }
        if let Some(body) = s.strip_prefix("linear:") {
            let nodes = body
                .split(';')
                .map(|node| {
                    let (x, v) = node
                        .split_once(',')
                        .ok_or_else(|| invalid(format!("expected x,value, got {node:?}")))?;
                    let x = parse_exact_value(x)?.to_f64();
                    let v = v.trim().parse().map_err(|_| invalid("bad node value"))?;
                    Ok((x, v))
                })
                .collect::<Result<Vec<_>>>()?;
            return Observable::piecewise_linear(nodes);
        }
        Err(invalid(format!(
            "unrecognized observable {s:?}; use power:…, indicator:…, or linear:…"
        )))
    }

    /// The singularity data `(β_exact, α)` when this is a singular power
    /// with exactly known location.
    #[must_use]
    pub fn singularity(&self) -> Option<(&ExactPoint, f64)> {
        match self {
            Observable::SingularPower { beta_exact: Some(b), alpha, .. } => Some((b, *alpha)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_power_is_symmetric_and_infinite_at_the_center() {
        let v = Observable::singular(ExactPoint::rational(1, 2).unwrap(), 0.5, 1.0).unwrap();
        assert!(v.eval(0.5).is_infinite());
        assert_eq!(v.eval(0.25), v.eval(0.75));
        assert_eq!(v.eval_f64(0.25), 2.0); // |0.25 − 0.5|^{−1/2} = 2
    }

    #[test]
    fn closed_form_integrals_hit_known_values() {
        // β = 0, α = 1/2: ∫ x^{−1/2} = 2.
        let v = Observable::singular(ExactPoint::rational(0, 1).unwrap(), 0.5, 3.0).unwrap();
        assert!((v.integral_lebesgue() - 6.0).abs() < 1e-14);
        // β = 1/2, α = 1/2: 2·(1/2)^{1/2}/(1/2) = 2√2.
        let w = Observable::singular(ExactPoint::rational(1, 2).unwrap(), 0.5, 1.0).unwrap();
        assert!((w.integral_lebesgue() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let ind = Observable::indicator(0.5, 1.0).unwrap();
        assert_eq!(ind.integral_lebesgue(), 0.5);
    }

    #[test]
    fn ramp_on_the_right_half_evaluates_and_integrates() {
        // f(x) = x on [1/2, 1], zero below.
        let f = Observable::piecewise_linear(vec![(0.5, 0.5), (1.0, 1.0)]).unwrap();
        assert_eq!(f.eval_f64(0.25), 0.0);
        assert_eq!(f.eval_f64(0.75), 0.75);
        assert_eq!(f.eval_f64(1.0), 1.0);
        assert!((f.integral_lebesgue() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn parser_accepts_the_pinned_forms() {
        let v = Observable::parse("power:beta=sqrt2-1,alpha=0.5").unwrap();
        let (b, a) = v.singularity().unwrap();
        assert!((b.to_f64() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(a, 0.5);
        let ind = Observable::parse("indicator:[0.5,1]").unwrap();
        assert_eq!(ind.eval_f64(0.7), 1.0);
        assert_eq!(ind.eval_f64(0.3), 0.0);
        let ramp = Observable::parse("linear:0.5,0.5;1,1").unwrap();
        assert_eq!(ramp.eval_f64(0.75), 0.75);
        assert_eq!(ramp.eval_f64(0.25), 0.0);
        assert!((ramp.integral_lebesgue() - 0.375).abs() < 1e-15);
        assert!(Observable::parse("power:alpha=0.5").is_err());
        assert!(Observable::parse("linear:0.5,0.5").is_err());
        assert!(Observable::parse("mystery:1").is_err());
    }

    #[test]
    fn infinity_prints_as_inf() {
        assert_eq!(ExtendedReal::PosInf.to_string(), "inf");
        assert_eq!(ExtendedReal::Finite(0.5).to_string(), "0.5");
        assert_eq!(ExtendedReal::Finite(1.0).add(ExtendedReal::PosInf), ExtendedReal::PosInf);
        assert_eq!(
            ExtendedReal::Finite(2.0).scale(3.0),
            ExtendedReal::Finite(6.0)
        );
    }
}
