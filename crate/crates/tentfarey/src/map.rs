//! The interpolated tent–Farey family `T_r` on the unit interval.
//!
//! For a parameter `r ∈ [0, 1]` the map is
//!
//! ```text
//!         ⎧ (2−r)·x / (1 − r·x)            x ∈ [0, 1/2]
//! T_r(x) = ⎨
//!         ⎩ (2−r)·(1−x) / (1 − r + r·x)    x ∈ (1/2, 1]
//! ```
//!
//! which is the doubling tent map at `r = 0` and the Farey map at `r = 1`.
//! Both branches are Möbius, so the two inverse branches are Möbius as well
//! and compositions of them are matrix products (see [`crate::mobius`]).
//! Away from `r = 1` the map is uniformly expanding; at `r = 1` the fixed
//! point at the origin becomes neutral and the absolutely continuous
//! invariant measure acquires infinite mass.
//!
//! This module owns the forward map, the inverse-branch matrices, the
//! invariant density and measure in closed form, and the nonzero fixed
//! point.  Operator iteration lives in [`crate::transfer`].

use crate::mobius::Mobius;

/// Smallest admissible parameter (the tent map).
pub const R_TENT: f64 = 0.0;

/// Largest admissible parameter (the Farey map).
pub const R_FAREY: f64 = 1.0;

/// One forward step of `T_r`.
///
/// The branch point `1/2` belongs to the left branch, which sends it to `1`
/// for every parameter.
#[must_use]
pub fn forward(r: f64, x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&r), "parameter {r} outside [0, 1]");
    debug_assert!((0.0..=1.0).contains(&x), "point {x} outside [0, 1]");
    if x <= 0.5 {
        (2.0 - r) * x / (1.0 - r * x)
    } else {
        (2.0 - r) * (1.0 - x) / (1.0 - r + r * x)
    }
}

/// The inverse branch `f_{r,i}` of `T_r` as a Möbius matrix: digit `0` is the
/// left branch (image `[0, 1/2]`), digit `1` the right (image `[1/2, 1]`).
///
/// At the endpoint parameters the entries are integers and the matrix is
/// exact; elsewhere it is floating.
///
/// # Panics
///
/// Panics if `digit` is not `0` or `1`.
#[must_use]
pub fn inverse_branch(r: f64, digit: u8) -> Mobius {
    assert!(digit <= 1, "branch digit must be 0 or 1, got {digit}");
    if r == R_TENT {
        // x/2 and 1 − x/2.
        return if digit == 0 {
            Mobius::from_ints(1, 0, 0, 2)
        } else {
            Mobius::from_ints(-1, 2, 0, 2)
        };
    }
    if r == R_FAREY {
        // x/(1+x) and 1/(1+x).
        return if digit == 0 {
            Mobius::from_ints(1, 0, 1, 1)
        } else {
            Mobius::from_ints(0, 1, 1, 1)
        };
    }
    if digit == 0 {
        Mobius::from_f64s(1.0, 0.0, r, 2.0 - r)
    } else {
        Mobius::from_f64s(-(1.0 - r), 2.0 - r, r, 2.0 - r)
    }
}

/// The matrix of the composed inverse branch `f_{r,ω} = f_{ω₁} ∘ … ∘ f_{ωₙ}`:
/// the first letter of the word acts last, so the product runs left to right.
#[must_use]
pub fn word_matrix(r: f64, word: &[u8]) -> Mobius {
    let mut m = Mobius::identity();
    for &digit in word {
        m = m.compose(&inverse_branch(r, digit));
    }
    m
}

/// Density of the absolutely continuous invariant measure:
/// `1` at `r = 0`, `(−r/ln(1−r)) / (1 − r + r·x)` for `r ∈ (0, 1)`, and the
/// non-normalizable `1/x` at `r = 1` (`+∞` at the origin).
#[must_use]
pub fn invariant_density(r: f64, x: f64) -> f64 {
    if r == R_TENT {
        1.0
    } else if r == R_FAREY {
        1.0 / x
    } else {
        (-r / (1.0 - r).ln()) / (1.0 - r + r * x)
    }
}

/// Measure of `[a, b]` under the invariant measure, `+∞` when `r = 1` and
/// `a = 0 < b`.  The measure is normalized to total mass one for `r < 1`.
#[must_use]
pub fn invariant_measure(r: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a <= b, "interval endpoints out of order: [{a}, {b}]");
    if r == R_TENT {
        b - a
    } else if r == R_FAREY {
        if a == b {
            0.0
        } else if a == 0.0 {
            f64::INFINITY
        } else {
            (b / a).ln()
        }
    } else {
        let l = (1.0 - r).ln();
        ((1.0 - r + r * a).ln() - (1.0 - r + r * b).ln()) / l
    }
}

/// The unique fixed point in `(0, 1)`: `1 − (3 − √(9 − 4r)) / (2r)`, written
/// in the rationalized form `1 − 2/(3 + √(9 − 4r))` that is free of
/// cancellation for small `r`.  It is `2/3` at `r = 0` and the golden-ratio
/// conjugate `(√5 − 1)/2` at `r = 1`.
#[must_use]
pub fn nonzero_fixed_point(r: f64) -> f64 {
    1.0 - 2.0 / (3.0 + (9.0 - 4.0 * r).sqrt())
}

/// Uniform bounds `(lower, upper)` for `|f′_{r,i}|` on the unit interval:
/// `(2−r)/4 ≤ |f′| ≤ 1/(2−r)`.
#[must_use]
pub fn branch_derivative_bounds(r: f64) -> (f64, f64) {
    ((2.0 - r) / 4.0, 1.0 / (2.0 - r))
}
