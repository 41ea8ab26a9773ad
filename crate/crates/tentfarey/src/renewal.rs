//! First-return structure of the Farey map on the right half-interval.
//!
//! Under the Farey map every point of `Y = [1/2, 1]` leaves, slides down
//! the left-branch ladder, and climbs back into `Y`.  The return time
//! partitions `Y` into cells `U_k = (k/(k+1), (k+1)/(k+2)]` (the first cell
//! keeps its left endpoint `1/2`), and the `k`-step return through `U_k`
//! contributes one branch word — a run of `k − 1` zeros closed by a one —
//! whose transfer-operator piece has the closed form
//!
//! ```text
//! R_k(f)(x) = 1_Y(x) · r_k(x) · f( (1 + (k−1)x) / (1 + kx) ),
//! r_k(x)    = x / ( (1 + kx)(1 + (k−1)x) ).
//! ```
//!
//! The pieces telescope — `Σ_{k ≤ m} r_k(x) = m·x/(1 + m·x)` — and carry
//! the whole renewal analysis: their invariant masses are the cell
//! measures, their bounded-variation norms decay cubically, and the weight
//! transported into its own cell is the explicit profile
//! `−k·u + 2k − 1 − (k−1)/u`.  This module provides all of these in closed
//! form, next to the induced (first-return) map itself.

use crate::bv::{BvProfile, MonotoneSegment};
use crate::num_util::CompensatedSum;
use crate::observable::ExtendedReal;

/// Endpoints of the return cell `U_k`, the points of the right half that
/// come back after exactly `k` steps: `(k/(k+1), (k+1)/(k+2)]`, with the
/// left endpoint included for `k = 1` only.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_cell(k: u64) -> (f64, f64) {
    assert!(k >= 1, "return cells are indexed from 1");
    let k = k as f64;
    (k / (k + 1.0), (k + 1.0) / (k + 2.0))
}

/// Membership in `U_k`, honoring the half-open convention.
#[must_use]
pub fn in_return_cell(k: u64, y: f64) -> bool {
    let (lo, hi) = return_cell(k);
    if k == 1 {
        (lo..=hi).contains(&y)
    } else {
        y > lo && y <= hi
    }
}

/// Invariant mass of the return cell: `μ(U_k) = ln(1 + 1/(k(k+2)))`.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_cell_measure(k: u64) -> f64 {
    assert!(k >= 1, "return cells are indexed from 1");
    let k = k as f64;
    (1.0 / (k * (k + 2.0))).ln_1p()
}

/// Steps until a point of the right half returns to it: `k` on `U_k`.
/// The fixed endpoint `1` is assigned `1` by convention.
///
/// # Panics
///
/// `y` must lie in `[1/2, 1]`.
#[must_use]
pub fn first_return_time(y: f64) -> u64 {
    assert!((0.5..=1.0).contains(&y), "return time is defined on the right half");
    if y == 1.0 {
        return 1;
    }
    let ratio = y / (1.0 - y);
    (ratio.ceil() as u64).saturating_sub(1).max(1)
}

/// The induced map on the right half: `T^{φ(y)}(y)`, in closed form
/// `(1 − y) / (k·y − (k − 1))` with `k` the return time.
///
/// # Panics
///
/// `y` must lie in `[1/2, 1]`.
#[must_use]
pub fn induced_map(y: f64) -> f64 {
    let k = first_return_time(y) as f64;
    (1.0 - y) / (k * y - (k - 1.0))
}

/// The return weight `r_k(x) = x / ((1 + kx)(1 + (k−1)x))`.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_weight(k: u64, x: f64) -> f64 {
    assert!(k >= 1, "return pieces are indexed from 1");
    let k = k as f64;
    x / ((1.0 + k * x) * (1.0 + (k - 1.0) * x))
}

/// The branch point the `k`-step return pulls `x` back to:
/// `(1 + (k−1)x) / (1 + kx)`, which lies in `U_k` exactly when `x` lies in
/// the right half.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_preimage(k: u64, x: f64) -> f64 {
    assert!(k >= 1, "return pieces are indexed from 1");
    let k = k as f64;
    (1.0 + (k - 1.0) * x) / (1.0 + k * x)
}

/// The `k`-th return piece applied to an observable:
/// `R_k(f)(x) = 1_Y(x)·r_k(x)·f(preimage)`.
pub fn first_return_term<F>(k: u64, f: &F, x: f64) -> ExtendedReal
where
    F: Fn(f64) -> ExtendedReal,
{
    if !(0.5..=1.0).contains(&x) {
        return ExtendedReal::Finite(0.0);
    }
    f(return_preimage(k, x)).scale(return_weight(k, x))
}

/// Compensated sum `Σ_{k=1}^{m} r_k(x)`, accumulated smallest-first so the
/// closed form is matched to the last few ulps even for `m` in the tens of
/// thousands.
#[must_use]
pub fn return_weight_partial_sum(m: u64, x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in (1..=m).rev() {
        acc.add(return_weight(k, x));
    }
    acc.value()
}

/// Closed form of the same partial sum: `m·x / (1 + m·x)`.
#[must_use]
pub fn return_weight_partial_sum_closed(m: u64, x: f64) -> f64 {
    let m = m as f64;
    m * x / (1.0 + m * x)
}

/// The return weight transported into its own cell: for `u` in `U_k` this
/// is `r_k` at the point whose `k`-step return lands on `u`, and it
/// simplifies to `−k·u + 2k − 1 − (k−1)/u`.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_weight_in_cell(k: u64, u: f64) -> f64 {
    assert!(k >= 1, "return cells are indexed from 1");
    let k = k as f64;
    -k * u + 2.0 * k - 1.0 - (k - 1.0) / u
}

/// Monotone profile of [`return_weight_in_cell`] on its cell: decreasing
/// for `k = 1`, single-peaked at `1/√2` for `k = 2`, increasing from
/// `1/(k(k+1))` to `2/((k+1)(k+2))` for `k ≥ 3`.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_weight_in_cell_profile(k: u64) -> BvProfile {
    let (lo, hi) = return_cell(k);
    let kf = k as f64;
    let v_lo = 1.0 / (kf * (kf + 1.0));
    let v_hi = 2.0 / ((kf + 1.0) * (kf + 2.0));
    let segments = if k == 2 {
        let peak = std::f64::consts::FRAC_1_SQRT_2;
        let v_peak = 3.0 - 2.0 * std::f64::consts::SQRT_2;
        vec![
            MonotoneSegment { lo, hi: peak, v_lo, v_hi: v_peak },
            MonotoneSegment { lo: peak, hi, v_lo: v_peak, v_hi },
        ]
    } else {
        // Decreasing for k = 1 (1/2 down to 1/3), increasing from k = 3 on.
        vec![MonotoneSegment { lo, hi, v_lo, v_hi }]
    };
    BvProfile::new(segments).expect("cell endpoints are valid segments")
}

/// Monotone profile of the return weight `r_k` on the right half
/// (zero-extended outside): increasing for `k = 1`, single-peaked at `1/√2`
/// for `k = 2`, decreasing for `k ≥ 3`.
///
/// # Panics
///
/// `k` must be positive.
#[must_use]
pub fn return_weight_profile(k: u64) -> BvProfile {
    assert!(k >= 1, "return pieces are indexed from 1");
    let kf = k as f64;
    let at_half = 2.0 / ((kf + 1.0) * (kf + 2.0));
    let at_one = 1.0 / (kf * (kf + 1.0));
    let segments = match k {
        1 => vec![MonotoneSegment { lo: 0.5, hi: 1.0, v_lo: at_half, v_hi: at_one }],
        2 => {
            let peak = std::f64::consts::FRAC_1_SQRT_2;
            let v_peak = 3.0 - 2.0 * std::f64::consts::SQRT_2;
            vec![
                MonotoneSegment { lo: 0.5, hi: peak, v_lo: at_half, v_hi: v_peak },
                MonotoneSegment { lo: peak, hi: 1.0, v_lo: v_peak, v_hi: at_one },
            ]
        }
        _ => vec![MonotoneSegment { lo: 0.5, hi: 1.0, v_lo: at_half, v_hi: at_one }],
    };
    BvProfile::new(segments).expect("the right half is a valid segment")
}

/// Bounded-variation norm of the return piece applied to the right-half
/// indicator; for `k ≥ 3` this is exactly `(5k − 2)/(k(k+1)(k+2))`.
#[must_use]
pub fn return_indicator_norm(k: u64) -> f64 {
    return_weight_profile(k).bv_norm()
}

/// One row of the cubic-decay comparison for the return-piece norms.
#[derive(Debug, Clone, Copy)]
pub struct ReturnNormRow {
    /// Return time of the piece.
    pub k: u64,
    /// Exact norm `‖R_k(1_Y)‖` from the monotone profile.
    pub norm: f64,
    /// The candidate envelope `16/(k+1)³`.
    pub cube_bound: f64,
    /// The envelope `8·μ(U_k)·‖1_Y‖` rescaled by the cell mass.
    pub measure_bound: f64,
}

/// Tabulates the return-piece norms against both candidate envelopes.  The
/// cubic envelope is *not* honored from `k = 4` on — the norms decay at the
/// cubic rate but with a larger constant — while the mass-proportional
/// envelope holds with room to spare.
#[must_use]
pub fn return_norm_report(max_k: u64) -> Vec<ReturnNormRow> {
    (1..=max_k)
        .map(|k| {
            let kf = k as f64;
            ReturnNormRow {
                k,
                norm: return_indicator_norm(k),
                cube_bound: 16.0 / ((kf + 1.0) * (kf + 1.0) * (kf + 1.0)),
                measure_bound: 8.0 * return_cell_measure(k) * 2.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::forward;
    use crate::observable::ExtendedReal;
    use crate::transfer::hat_exact;

    #[test]
    fn cells_tile_the_right_half_and_their_masses_telescope() {
        for k in 1..200 {
            let (_, hi) = return_cell(k);
            let (lo_next, _) = return_cell(k + 1);
            assert_eq!(hi, lo_next);
        }
        let total: f64 = (1..=100_000).map(return_cell_measure).sum();
        assert!((total - std::f64::consts::LN_2).abs() < 2e-5, "total {total}");
    }

    #[test]
    fn return_time_matches_the_dynamics() {
        for &y in &[0.5, 0.6, 2.0 / 3.0, 0.67, 0.75, 0.76, 0.9, 0.95, 0.99] {
            let k = first_return_time(y);
            let mut z = y;
            for step in 1..=k {
                z = forward(1.0, z);
                if step < k {
                    assert!(z < 0.5, "y = {y} re-entered early at step {step}");
                }
            }
            // Cell boundaries reach 1/2 exactly; allow a float ulp of slack.
            assert!(z >= 0.5 - 1e-9, "y = {y} had not returned after {k} steps");
        }
    }

    #[test]
    fn induced_map_is_the_iterated_map() {
        for &y in &[0.52, 0.61, 0.7, 0.81, 0.93, 0.999] {
            let k = first_return_time(y);
            let mut z = y;
            for _ in 0..k {
                z = forward(1.0, z);
            }
            // Iterating the slow branch k times amplifies rounding by the
            // derivative product ≈ (x_k/x_0)², so the iterated comparison
            // side loses digits quadratically in the excursion length.
            let tol = 1e-12 + 1e-15 * (k as f64) * (k as f64);
            assert!((induced_map(y) - z).abs() < tol, "y = {y}");
        }
    }

    #[test]
    fn preimages_land_in_their_cells() {
        // x = 1 is excluded: its preimage is the open left edge of the cell.
        for k in 1..=40 {
            for &x in &[0.5, 0.6, 0.85, 0.999] {
                assert!(in_return_cell(k, return_preimage(k, x)), "k = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn weights_telescope_to_the_closed_form() {
        for &x in &[0.5, 0.8, 1.0] {
            for m in [10u64, 1_000, 10_000] {
                let sum = return_weight_partial_sum(m, x);
                let closed = return_weight_partial_sum_closed(m, x);
                assert!((sum - closed).abs() < 1e-14, "m = {m}, x = {x}: {sum} vs {closed}");
            }
        }
    }

    #[test]
    fn return_piece_is_the_operator_restricted_to_its_cell() {
        let f = |y: f64| ExtendedReal::Finite(1.0 + y * y);
        for k in 1..=8 {
            let restricted = move |y: f64| {
                if in_return_cell(k, y) {
                    f(y)
                } else {
                    ExtendedReal::Finite(0.0)
                }
            };
            for &x in &[0.55, 0.7, 0.9] {
                let direct = first_return_term(k, &f, x).as_f64();
                let operator = hat_exact(k as u32, &restricted, x).unwrap().as_f64();
                assert!((direct - operator).abs() < 1e-13, "k = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn piece_masses_are_the_cell_measures() {
        for k in [1u64, 2, 5, 9] {
            let mass = crate::quad::integrate(
                &|x: f64| return_weight(k, x) / x,
                0.5,
                1.0,
                1e-12,
            );
            assert!(
                (mass - return_cell_measure(k)).abs() < 1e-10,
                "k = {k}: {mass} vs {}",
                return_cell_measure(k)
            );
        }
    }

    #[test]
    fn cell_weight_pulls_back_the_return_weight() {
        for k in [1u64, 2, 3, 10, 60] {
            for &x in &[0.5, 0.66, 0.84, 1.0] {
                let u = return_preimage(k, x);
                let direct = return_weight(k, x);
                let in_cell = return_weight_in_cell(k, u);
                assert!((direct - in_cell).abs() < 1e-14, "k = {k}, x = {x}");
            }
        }
    }

    #[test]
    fn cell_weight_profiles_match_a_numeric_scan() {
        for k in [1u64, 2, 3, 7, 100] {
            let profile = return_weight_in_cell_profile(k);
            let (lo, hi) = return_cell(k);
            let mut sup = 0.0_f64;
            for i in 0..=2000 {
                let u = lo + (hi - lo) * i as f64 / 2000.0;
                sup = sup.max(return_weight_in_cell(k, u).abs());
            }
            assert!(
                (profile.sup_abs() - sup).abs() < 1e-7,
                "k = {k}: {} vs scanned {sup}",
                profile.sup_abs()
            );
            // Endpoint values are exact.
            let kf = k as f64;
            if k >= 3 {
                let eps = 1e-12;
                assert!(
                    (return_weight_in_cell(k, lo) - 1.0 / (kf * (kf + 1.0))).abs() < eps
                );
                assert!(
                    (return_weight_in_cell(k, hi) - 2.0 / ((kf + 1.0) * (kf + 2.0))).abs() < eps
                );
            }
        }
    }

    #[test]
    fn indicator_norms_match_the_cubic_closed_form() {
        assert!((return_indicator_norm(1) - 1.0).abs() < 1e-15);
        let expected_2 = 3.0 * (3.0 - 2.0 * std::f64::consts::SQRT_2) - 1.0 / 6.0;
        assert!((return_indicator_norm(2) - expected_2).abs() < 1e-15);
        for k in 3..=50 {
            let kf = k as f64;
            let closed = (5.0 * kf - 2.0) / (kf * (kf + 1.0) * (kf + 2.0));
            assert!(
                (return_indicator_norm(k) - closed).abs() < 1e-15,
                "k = {k}"
            );
        }
        assert!((return_indicator_norm(3) - 13.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_envelope_breaks_at_four_but_the_mass_envelope_holds() {
        let rows = return_norm_report(50);
        for row in &rows[..3] {
            assert!(row.norm <= row.cube_bound, "k = {}", row.k);
        }
        assert!(rows[3].norm > rows[3].cube_bound, "the k = 4 excess is real");
        for row in &rows {
            assert!(row.norm <= row.measure_bound, "k = {}", row.k);
        }
    }
}
