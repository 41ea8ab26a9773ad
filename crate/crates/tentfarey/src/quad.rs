//! Adaptive quadrature, with a substitution that tames power-law endpoint
//! singularities.
//!
//! Closed-form integrals in this crate ([`crate::observable`],
//! [`crate::map::invariant_measure`]) get their independent cross-checks
//! from here.  The workhorse is adaptive Simpson with the classical
//! one-fifteenth error estimate; for integrands `|x − β|^{−α} · g(x)` the
//! substitution `u = (x − β)^{1−α}` turns the singular factor into a
//! constant Jacobian, so plain Simpson converges on the substituted axis
//! even though the original integrand blows up.

use crate::error::{invalid, Result};

/// Hard recursion cap; reaching it returns the best estimate so far rather
/// than recursing forever on a non-integrable input.
const MAX_DEPTH: u32 = 50;

/// `∫_a^b f` by adaptive Simpson to the given absolute tolerance.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    adaptive(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// `∫_a^b |x − β|^{−α} · g(x) dx` for smooth `g`, splitting at `β` when it
/// lies inside and substituting `u = |x − β|^{1−α}` on each singular side.
///
/// # Errors
///
/// Requires `α ∈ (0, 1)` and `a ≤ b`.
pub fn integrate_power_weighted(
    g: &impl Fn(f64) -> f64,
    beta: f64,
    alpha: f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("exponent {alpha} outside (0, 1)")));
    }
    if a > b {
        return Err(invalid(format!("interval endpoints out of order: [{a}, {b}]")));
    }
    let p = 1.0 - alpha;
    // One singular side: ∫ over [0, h^p] of g(β ± u^{1/p}) du / p, touching
    // only points between β and β ± h.
    let one_side = |h: f64, sign: f64| -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let sub = |u: f64| g(beta + sign * u.powf(1.0 / p));
        integrate(&sub, 0.0, h.powf(p), tol * p) / p
    };
    if beta < a || beta > b {
        // The singularity lies outside: the integrand is smooth on [a, b].
        Ok(integrate(&|x| (x - beta).abs().powf(-alpha) * g(x), a, b, tol))
    } else {
        Ok(one_side(beta - a, -1.0) + one_side(b - beta, 1.0))
    }
}

/// `∫_a^b f dμ_r` — the integral against the invariant density — by
/// adaptive Simpson on `f · h_r`.
pub fn integrate_invariant(r: f64, f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    integrate(&|x| f(x) * crate::map::invariant_density(r, x), a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_integrate_to_machine_precision() {
        let v = integrate(&|x| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let w = integrate(&|x| x.exp(), 0.0, 1.0, 1e-12);
        assert!((w - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn logarithmic_mass_matches_the_closed_form() {
        for n in [1u64, 10, 100] {
            let a = 1.0 / (n as f64 + 1.0);
            let v = integrate(&|x| 1.0 / x, a, 1.0, 1e-12);
            assert!((v - (n as f64 + 1.0).ln()).abs() < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn singular_weight_reproduces_the_closed_form_integral() {
        // ∫₀¹ |x − 1/3|^{−2/5} dx = ((1/3)^{3/5} + (2/3)^{3/5}) / (3/5).
        let (beta, alpha) = (1.0 / 3.0, 0.4);
        let v = integrate_power_weighted(&|_| 1.0, beta, alpha, 0.0, 1.0, 1e-12).unwrap();
        let p = 1.0 - alpha;
        let expected = (beta.powf(p) + (1.0 - beta).powf(p)) / p;
        assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
    }

    #[test]
    fn singular_weight_with_polynomial_factor() {
        // ∫₀¹ (x − β)·|x − β|^{−α} dx integrates the signed power directly:
        // ((1−β)^{2−α} − β^{2−α}) / (2 − α).
        let (beta, alpha) = (0.25, 0.6);
        let v = integrate_power_weighted(&|x| x - beta, beta, alpha, 0.0, 1.0, 1e-12).unwrap();
        let q = 2.0 - alpha;
        let expected = ((1.0 - beta).powf(q) - beta.powf(q)) / q;
        assert!((v - expected).abs() < 1e-10);
    }

    #[test]
    fn one_sided_and_offset_ranges_work() {
        // β below the interval: ordinary smooth integrand.
        let v = integrate_power_weighted(&|_| 1.0, 0.0, 0.5, 0.25, 1.0, 1e-12).unwrap();
        let expected = 2.0 * (1.0f64.sqrt() - 0.5); // ∫ x^{−1/2} over [1/4, 1]
        assert!((v - expected).abs() < 1e-10);
    }

    #[test]
    fn invariant_integrals_use_the_density() {
        // ∫ 1 dμ_r = 1 for r < 1; ∫_{[1/2,1]} x dμ₁ = 1/2.
        for r in [0.0, 0.5, 0.9] {
            let v = integrate_invariant(r, &|_| 1.0, 0.0, 1.0, 1e-12);
            assert!((v - 1.0).abs() < 1e-10, "r = {r}");
        }
        let w = integrate_invariant(1.0, &|x| x, 0.5, 1.0, 1e-12);
        assert!((w - 0.5).abs() < 1e-12);
    }
}
