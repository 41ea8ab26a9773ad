//! Transfer-operator iteration: exact branch-sum trees and a fast grid
//! backend.
//!
//! Two dual operators matter here.  The Perron–Frobenius operator of `T_r`
//! acts on densities,
//!
//! ```text
//! P_r(f)(x) = |f′_{r,0}(x)|·f(f_{r,0}(x)) + |f′_{r,1}(x)|·f(f_{r,1}(x)),
//! ```
//!
//! and fixes the invariant density.  At the Farey endpoint its conjugation
//! by the invariant density gives the measure-preserving dual
//!
//! ```text
//! T̂(f)(x) = f_{1,1}(x)·f(f_{1,0}(x)) + f_{1,0}(x)·f(f_{1,1}(x)),
//! ```
//!
//! whose weights are the branch images themselves and sum to one — a Markov
//! averaging operator.  Both admit two evaluation strategies:
//!
//! * **exact trees** — the `n`-th iterate at a point is the sum over all
//!   `2ⁿ` branch words, each contributing through its composed Möbius
//!   matrix; exact in the branch arithmetic, exponential in `n`, capped at
//!   [`MAX_TREE_DEPTH`];
//! * **grids** — piecewise-linear functions on a uniform grid, one operator
//!   application per sweep, linear in the node count and usable for `10⁵`
//!   iterations and more.
//!
//! The module also provides the age partition of the left half-interval,
//! the renewal-type decomposition of `T̂ⁿ` over it, the wandering rate of
//! the right half-interval, and a one-step extension relation that reads an
//! iterate at a left-branch image off values at the point itself.

use crate::error::{capacity, invalid, Result};
use crate::map::{self, R_FAREY};
use crate::mobius::Mobius;
use crate::observable::ExtendedReal;

/// Largest exact-tree depth: `2²⁶` leaves is around the practical limit,
/// and machine-integer branch matrices are guaranteed not to overflow below
/// it at the endpoint parameters.
pub const MAX_TREE_DEPTH: u32 = 26;

fn check_depth(n: u32) -> Result<()> {
    if n > MAX_TREE_DEPTH {
        return Err(capacity(format!(
            "tree depth {n} exceeds the exact-tree cap {MAX_TREE_DEPTH}"
        )));
    }
    Ok(())
}

/// Depth from which the branch DFS splits across threads.
const PARALLEL_MIN_DEPTH: u32 = 16;
/// Levels of the tree that fork; below them the walk is sequential.
const PARALLEL_LEVELS: u32 = 6;

/// `P_rⁿ(f)(x)` as the exact sum over all branch words of length `n`.
///
/// # Errors
///
/// Depth must not exceed [`MAX_TREE_DEPTH`].
pub fn pf_exact<F>(r: f64, n: u32, f: &F, x: f64) -> Result<ExtendedReal>
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    check_depth(n)?;
    let branches = [map::inverse_branch(r, 0), map::inverse_branch(r, 1)];
    let par = if n >= PARALLEL_MIN_DEPTH { PARALLEL_LEVELS } else { 0 };
    Ok(pf_dfs(&Mobius::identity(), n, par, &branches, f, x))
}

fn pf_dfs<F>(m: &Mobius, left: u32, par: u32, branches: &[Mobius; 2], f: &F, x: f64) -> ExtendedReal
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    if left == 0 {
        return f(m.eval_f64(x)).scale(m.deriv_abs_f64(x));
    }
    let m0 = m.compose(&branches[0]);
    let m1 = m.compose(&branches[1]);
    if par > 0 {
        let (a, b) = rayon::join(
            || pf_dfs(&m0, left - 1, par - 1, branches, f, x),
            || pf_dfs(&m1, left - 1, par - 1, branches, f, x),
        );
        a.add(b)
    } else {
        pf_dfs(&m0, left - 1, 0, branches, f, x).add(pf_dfs(&m1, left - 1, 0, branches, f, x))
    }
}

/// `T̂ⁿ(f)(x)` for the Farey dual, as the exact branch-word sum with
/// weights `x / ((a·x + b)(c·x + d))` read off each word matrix.  The
/// origin is fixed with weight concentrating on the all-zeros word, so
/// `T̂ⁿ(f)(0) = f(0)`.
///
/// # Errors
///
/// Depth must not exceed [`MAX_TREE_DEPTH`].
pub fn hat_exact<F>(n: u32, f: &F, x: f64) -> Result<ExtendedReal>
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    check_depth(n)?;
    if x == 0.0 {
        return Ok(f(0.0));
    }
    let branches = [map::inverse_branch(R_FAREY, 0), map::inverse_branch(R_FAREY, 1)];
    let par = if n >= PARALLEL_MIN_DEPTH { PARALLEL_LEVELS } else { 0 };
    Ok(hat_dfs(&Mobius::identity(), n, par, &branches, f, x))
}

fn hat_dfs<F>(m: &Mobius, left: u32, par: u32, branches: &[Mobius; 2], f: &F, x: f64) -> ExtendedReal
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    if left == 0 {
        let ([a, b, c, d], _) = m.entries_f64();
        let num = a * x + b;
        let den = c * x + d;
        let w = x / (num * den);
        return f(num / den).scale(w);
    }
    let m0 = m.compose(&branches[0]);
    let m1 = m.compose(&branches[1]);
    if par > 0 {
        let (a, b) = rayon::join(
            || hat_dfs(&m0, left - 1, par - 1, branches, f, x),
            || hat_dfs(&m1, left - 1, par - 1, branches, f, x),
        );
        a.add(b)
    } else {
        hat_dfs(&m0, left - 1, 0, branches, f, x).add(hat_dfs(&m1, left - 1, 0, branches, f, x))
    }
}

/// The age partition of `(0, 1]`: cell `0` is the right half `[1/2, 1]`,
/// and cell `j ≥ 1` is `[1/(j+2), 1/(j+1))`, the points that first enter
/// the right half after exactly `j` left-branch steps.
#[must_use]
pub fn age_interval(j: u64) -> (f64, f64) {
    if j == 0 {
        (0.5, 1.0)
    } else {
        (1.0 / (j as f64 + 2.0), 1.0 / (j as f64 + 1.0))
    }
}

/// Membership in the age cell `j`, with cell `0` closed and the others
/// right-open, so every point of `(0, 1]` lies in exactly one cell.
#[must_use]
pub fn in_age_interval(j: u64, x: f64) -> bool {
    let (lo, hi) = age_interval(j);
    if j == 0 {
        x >= lo && x <= hi
    } else {
        x >= lo && x < hi
    }
}

/// The renewal-type decomposition of the restricted iterate: for `x` in the
/// right half,
///
/// ```text
/// T̂ⁿ(f)(x) = Σ_{j=0}^{n} T̂^{n−j}( 1_Y · T̂^{j}( 1_{Y_j} · f ) )(x),
/// ```
///
/// where `Y` is the right half and `Y_j` the age cell `j`.  The left side
/// is [`hat_exact`]; this function evaluates the right side with nested
/// exact trees (cost `(n+1)·2ⁿ` leaf visits).
///
/// # Errors
///
/// Depth must not exceed [`MAX_TREE_DEPTH`]; `x` must lie in the right
/// half.
pub fn hat_decomposition_rhs<F>(n: u32, f: &F, x: f64) -> Result<ExtendedReal>
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    check_depth(n)?;
    if !(0.5..=1.0).contains(&x) {
        return Err(invalid(format!("decomposition point {x} outside the right half")));
    }
    let mut total = ExtendedReal::Finite(0.0);
    for j in 0..=n {
        let inner = |y: f64| -> ExtendedReal {
            if !(0.5..=1.0).contains(&y) {
                return ExtendedReal::Finite(0.0);
            }
            let restricted = |z: f64| -> ExtendedReal {
                if in_age_interval(u64::from(j), z) {
                    f(z)
                } else {
                    ExtendedReal::Finite(0.0)
                }
            };
            hat_exact(j, &restricted, y).expect("depth j ≤ n already validated")
        };
        total = total.add(hat_exact(n - j, &inner, x)?);
    }
    Ok(total)
}

/// Reads `P_rⁿ(f)` at the left-branch image `f_{r,0}(x)` from values at `x`
/// and at the right-branch image, through the one-step relation
///
/// ```text
/// Pⁿf(f₀(x)) = ( P^{n+1}f(x) − |f′₁(x)|·Pⁿf(f₁(x)) ) / |f′₀(x)| .
/// ```
///
/// All three operator values are computed with exact trees; the observable
/// must be finite at the involved leaves for the difference to be
/// meaningful.
///
/// # Errors
///
/// Depth `n + 1` must not exceed [`MAX_TREE_DEPTH`].
pub fn pf_at_left_image<F>(r: f64, n: u32, f: &F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> ExtendedReal + Sync,
{
    check_depth(n + 1)?;
    let up = pf_exact(r, n + 1, f, x)?.as_f64();
    let b1 = map::inverse_branch(r, 1);
    let right = pf_exact(r, n, f, b1.eval_f64(x))?.as_f64();
    let b0 = map::inverse_branch(r, 0);
    Ok((up - b1.deriv_abs_f64(x) * right) / b0.deriv_abs_f64(x))
}

/// Mass of the set reaching the right half within `n` steps:
/// `μ_r( ∪_{k<n} T_r^{−k}([1/2, 1]) )`, which is the invariant measure of
/// `[f_{r,0}^{n−1}(1/2), 1]`.  At the Farey endpoint the left edge is
/// exactly `1/(n+1)` and the rate is exactly `ln(n + 1)`.
#[must_use]
pub fn wandering_rate(r: f64, n: u64) -> f64 {
    assert!(n >= 1, "the union is over at least one preimage");
    if r == R_FAREY {
        return (n as f64 + 1.0).ln();
    }
    // f_{r,0}^k(1/2) = (1−r)/(s^{k+1} − r) with s = 2 − r (geometric sum of
    // the lower-left matrix entry); underflow to zero is the correct limit.
    let s = 2.0 - r;
    let edge = (1.0 - r) / (s.powi(n as i32) - r);
    map::invariant_measure(r, edge, 1.0)
}

/// Piecewise-linear functions on the uniform grid `x_i = i/N`, together
/// with a prebuilt one-sweep application of a transfer operator: each node
/// pulls the interpolated values at its two branch images with fixed
/// weights, so a sweep is two fused multiply-adds per node.
#[derive(Debug, Clone)]
pub struct GridOperator {
    intervals: usize,
    idx: [Vec<u32>; 2],
    frac: [Vec<f64>; 2],
    coeff: [Vec<f64>; 2],
}

impl GridOperator {
    /// The Farey dual `T̂` on a grid with the given number of intervals.
    #[must_use]
    pub fn farey_hat(intervals: usize) -> Self {
        // Weight on the branch-0 image is the branch-1 image and vice versa.
        Self::build(
            intervals,
            |x| (x / (1.0 + x), 1.0 / (1.0 + x)),
            |x| (1.0 / (1.0 + x), x / (1.0 + x)),
        )
    }

    /// The Perron–Frobenius operator of `T_r` on a grid.
    #[must_use]
    pub fn perron_frobenius(r: f64, intervals: usize) -> Self {
        let b0 = map::inverse_branch(r, 0);
        let b1 = map::inverse_branch(r, 1);
        let (d0, d1) = (b0.clone(), b1.clone());
        Self::build(
            intervals,
            move |x| (b0.eval_f64(x), b1.eval_f64(x)),
            move |x| (d0.deriv_abs_f64(x), d1.deriv_abs_f64(x)),
        )
    }

    fn build(
        intervals: usize,
        images: impl Fn(f64) -> (f64, f64),
        weights: impl Fn(f64) -> (f64, f64),
    ) -> Self {
        assert!(intervals >= 2, "need at least two grid intervals");
        let nodes = intervals + 1;
        let mut op = GridOperator {
            intervals,
            idx: [Vec::with_capacity(nodes), Vec::with_capacity(nodes)],
            frac: [Vec::with_capacity(nodes), Vec::with_capacity(nodes)],
            coeff: [Vec::with_capacity(nodes), Vec::with_capacity(nodes)],
        };
        for i in 0..nodes {
            let x = i as f64 / intervals as f64;
            let (y0, y1) = images(x);
            let (w0, w1) = weights(x);
            for (branch, y, w) in [(0usize, y0, w0), (1, y1, w1)] {
                let pos = (y.clamp(0.0, 1.0)) * intervals as f64;
                let cell = (pos.floor() as usize).min(intervals - 1);
                op.idx[branch].push(cell as u32);
                op.frac[branch].push(pos - cell as f64);
                op.coeff[branch].push(w);
            }
        }
        op
    }

    /// Number of grid intervals `N` (there are `N + 1` nodes).
    #[must_use]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Node values of a function, ready for [`GridOperator::step`].
    #[must_use]
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.intervals)
            .map(|i| f(i as f64 / self.intervals as f64))
            .collect()
    }

    /// One operator application: `dst[i] = Σ_branches w·lerp(src, image)`.
    ///
    /// # Panics
    ///
    /// Both slices must hold exactly `N + 1` node values.
    pub fn step(&self, src: &[f64], dst: &mut [f64]) {
        let nodes = self.intervals + 1;
        assert_eq!(src.len(), nodes, "source node count");
        assert_eq!(dst.len(), nodes, "destination node count");
        for i in 0..nodes {
            let mut acc = 0.0;
            for branch in 0..2 {
                let cell = self.idx[branch][i] as usize;
                let t = self.frac[branch][i];
                let interp = src[cell] * (1.0 - t) + src[cell + 1] * t;
                acc += self.coeff[branch][i] * interp;
            }
            dst[i] = acc;
        }
    }

    /// Applies the operator `steps` times in place.
    pub fn iterate(&self, values: &mut Vec<f64>, steps: u64) {
        let mut scratch = vec![0.0; values.len()];
        for _ in 0..steps {
            self.step(values, &mut scratch);
            std::mem::swap(values, &mut scratch);
        }
    }

    /// Linear interpolation of node values at an arbitrary point.
    #[must_use]
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let pos = x.clamp(0.0, 1.0) * self.intervals as f64;
        let cell = (pos.floor() as usize).min(self.intervals - 1);
        let t = pos - cell as f64;
        values[cell] * (1.0 - t) + values[cell + 1] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{invariant_density, inverse_branch};

    fn finite(f: impl Fn(f64) -> f64 + Sync) -> impl Fn(f64) -> ExtendedReal + Sync {
        move |x| ExtendedReal::Finite(f(x))
    }

    #[test]
    fn two_step_tree_matches_the_explicit_four_term_sum() {
        let r = 0.6;
        let f = |y: f64| y * y + 1.0;
        let x = 0.37;
        let mut expected = 0.0;
        for word in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let m = crate::map::word_matrix(r, &word);
            expected += m.deriv_abs_f64(x) * f(m.eval_f64(x));
        }
        let got = pf_exact(r, 2, &finite(f), x).unwrap().as_f64();
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn invariant_density_is_pointwise_fixed() {
        for r in [0.0, 0.3, 0.8] {
            let h = move |y: f64| invariant_density(r, y);
            for x in [0.1, 0.5, 0.9] {
                let v = pf_exact(r, 1, &finite(h), x).unwrap().as_f64();
                assert!((v - h(x)).abs() < 1e-12, "r = {r}, x = {x}");
            }
        }
    }

    #[test]
    fn iterates_conserve_lebesgue_mass() {
        let r = 0.7;
        let f = |y: f64| 1.0 + y * (1.0 - y);
        let before = crate::quad::integrate(&f, 0.0, 1.0, 1e-11);
        let pushed =
            |x: f64| pf_exact(r, 3, &finite(f), x).expect("depth 3 is valid").as_f64();
        let after = crate::quad::integrate(&pushed, 0.0, 1.0, 1e-11);
        assert!((after - before).abs() < 1e-9, "{after} vs {before}");
    }

    #[test]
    fn hat_weights_form_a_partition_of_unity() {
        let one = finite(|_| 1.0);
        for n in [1u32, 5, 12] {
            for x in [0.2, 0.7, 1.0] {
                let v = hat_exact(n, &one, x).unwrap().as_f64();
                assert!((v - 1.0).abs() < 1e-12, "n = {n}, x = {x}");
            }
        }
    }

    #[test]
    fn hat_of_the_right_half_indicator_is_the_left_branch() {
        let ind = finite(|y: f64| f64::from(u8::from(y >= 0.5)));
        for x in [0.1, 0.4, 0.9] {
            let v = hat_exact(1, &ind, x).unwrap().as_f64();
            assert!((v - x / (1.0 + x)).abs() < 1e-15, "x = {x}");
        }
        assert!((hat_exact(1, &ind, 1.0).unwrap().as_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deep_age_block_collapses_to_the_telescoping_product() {
        // For x in the right half, T̂ⁿ(1_{Y_n})(x) = 1/(1 + n·x): only the
        // all-zeros word survives and its weights telescope.
        for n in [3u32, 7, 11] {
            let ind = move |z: f64| {
                ExtendedReal::Finite(f64::from(u8::from(in_age_interval(u64::from(n), z))))
            };
            for x in [0.5, 0.75, 0.99] {
                let v = hat_exact(n, &ind, x).unwrap().as_f64();
                assert!(
                    (v - 1.0 / (1.0 + f64::from(n) * x)).abs() < 1e-12,
                    "n = {n}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn origin_is_fixed_by_the_dual() {
        let f = finite(|y: f64| 3.0 - y);
        assert_eq!(hat_exact(9, &f, 0.0).unwrap().as_f64(), 3.0);
    }

    #[test]
    fn decomposition_identity_holds_for_general_observables() {
        let f = finite(|y: f64| (1.0 + y).sqrt());
        for n in [1u32, 4, 7] {
            for x in [0.5, 0.7, 0.95] {
                let lhs = hat_exact(n, &f, x).unwrap().as_f64();
                let rhs = hat_decomposition_rhs(n, &f, x).unwrap().as_f64();
                assert!((lhs - rhs).abs() < 1e-12, "n = {n}, x = {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn age_cells_step_down_under_the_map() {
        for j in [1u64, 2, 5, 20] {
            let (lo, hi) = age_interval(j);
            let (plo, phi) = age_interval(j - 1);
            assert!((map::forward(1.0, lo) - plo).abs() < 1e-12);
            assert!((map::forward(1.0, hi) - phi).abs() < 1e-12);
        }
    }

    #[test]
    fn extension_relation_reproduces_the_direct_tree() {
        let r = 0.4;
        let f = finite(|y: f64| 1.0 / (1.0 + y));
        for x in [0.2, 0.6, 0.9] {
            let left_image = inverse_branch(r, 0).eval_f64(x);
            let direct = pf_exact(r, 5, &f, left_image).unwrap().as_f64();
            let via_relation = pf_at_left_image(r, 5, &f, x).unwrap();
            assert!((direct - via_relation).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn wandering_rate_oracles() {
        // Farey: exactly ln(n + 1), same expression bit for bit.
        for n in [1u64, 10, 1000] {
            assert_eq!(wandering_rate(1.0, n), (n as f64 + 1.0).ln());
        }
        // Tent: 1 − 2^{−n}.
        assert_eq!(wandering_rate(0.0, 1), 0.5);
        assert_eq!(wandering_rate(0.0, 3), 0.875);
        // Interior parameters approach full mass.
        assert!((wandering_rate(0.5, 200) - 1.0).abs() < 1e-12);
        assert!(wandering_rate(0.5, 1) < wandering_rate(0.5, 2));
    }

    #[test]
    fn grid_backend_tracks_the_exact_tree_for_smooth_data() {
        let op = GridOperator::farey_hat(4096);
        let mut values = op.sample(|x| x * x);
        op.iterate(&mut values, 6);
        let f = finite(|y: f64| y * y);
        for x in [0.3, 0.6, 0.9] {
            let exact = hat_exact(6, &f, x).unwrap().as_f64();
            let grid = op.interpolate(&values, x);
            assert!((exact - grid).abs() < 1e-5, "x = {x}: {exact} vs {grid}");
        }
    }

    #[test]
    fn grid_perron_frobenius_fixes_the_invariant_density() {
        let r = 0.5;
        let op = GridOperator::perron_frobenius(r, 2048);
        let mut values = op.sample(|x| invariant_density(r, x));
        op.iterate(&mut values, 4);
        for x in [0.25, 0.5, 0.75] {
            let got = op.interpolate(&values, x);
            assert!((got - invariant_density(r, x)).abs() < 1e-6, "x = {x}");
        }
    }
}
