//! Binary itineraries and cylinder structure of the map family.
//!
//! A point's itinerary records, for each iterate, whether the orbit sits in
//! the left branch domain (`digit 0`, `x ≤ 1/2`) or the right (`digit 1`).
//! The depth-`n` cylinders — images of the unit interval under the composed
//! inverse branches — tile `[0, 1]` in binary-reflected order, so two
//! cylinders of equal depth are adjacent exactly when their words differ in
//! a single position.  This module computes itineraries (exactly at the
//! endpoint parameters, in floating point elsewhere), cylinder intervals,
//! and the word triple of a point's cylinder together with its two
//! neighbors, which is what singular-tail evaluation sums over away from the
//! Farey endpoint.

use crate::map::{self, R_FAREY, R_TENT};
use crate::mobius::Mobius;
use crate::surd::ExactPoint;

/// Matching tolerance for shared cylinder endpoints in the floating path.
const ENDPOINT_TOLERANCE: f64 = 1e-12;

/// The itinerary of `x` under `T_r` to depth `n`, floating-point orbit.
#[must_use]
pub fn code_point(r: f64, x: f64, n: u64) -> Vec<u8> {
    let mut digits = Vec::with_capacity(n as usize);
    let mut y = x;
    for _ in 0..n {
        digits.push(u8::from(y > 0.5));
        y = map::forward(r, y);
    }
    digits
}

/// The itinerary of an exactly represented point under the tent map
/// (`farey = false`) or the Farey map (`farey = true`), with exact branch
/// decisions.
#[must_use]
pub fn code_point_exact(farey: bool, x: &ExactPoint, n: u64) -> Vec<u8> {
    let mut digits = Vec::with_capacity(n as usize);
    let mut y = x.clone();
    for _ in 0..n {
        digits.push(u8::from(y.cmp_half() == std::cmp::Ordering::Greater));
        y = if farey { y.farey_step() } else { y.tent_step() };
    }
    digits
}

/// The cylinder `f_{r,ω}([0, 1])` as an ordered interval, floating point.
#[must_use]
pub fn cylinder_interval(r: f64, word: &[u8]) -> (f64, f64) {
    let m = map::word_matrix(r, word);
    let (a, b) = (m.eval_f64(0.0), m.eval_f64(1.0));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The cylinder interval with exact endpoints at an endpoint parameter.
#[must_use]
pub fn cylinder_interval_exact(farey: bool, word: &[u8]) -> (ExactPoint, ExactPoint) {
    let r = if farey { R_FAREY } else { R_TENT };
    let m = map::word_matrix(r, word);
    let zero = ExactPoint::rational(0, 1).expect("0 is a unit-interval point");
    let one = ExactPoint::rational(1, 1).expect("1 is a unit-interval point");
    let (a, b) = (m.eval_exact(&zero), m.eval_exact(&one));
    if a.to_surd().cmp_value(&b.to_surd()) != std::cmp::Ordering::Greater {
        (a, b)
    } else {
        (b, a)
    }
}

/// A point's depth-`n` cylinder word together with the words of the
/// neighboring cylinders on each side.  A side that does not exist (the
/// cylinder touches `0` or `1`) carries a copy of the center word, so the
/// triple always has three entries; [`NeighborWords::unique`] strips the
/// duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborWords {
    /// Word of the cylinder immediately below.
    pub left: Vec<u8>,
    /// The point's own cylinder word.
    pub center: Vec<u8>,
    /// Word of the cylinder immediately above.
    pub right: Vec<u8>,
}

impl NeighborWords {
    /// The distinct words of the triple, center first.
    #[must_use]
    pub fn unique(&self) -> Vec<&[u8]> {
        let mut out: Vec<&[u8]> = vec![&self.center];
        if self.left != self.center {
            out.push(&self.left);
        }
        if self.right != self.center && self.right != self.left {
            out.push(&self.right);
        }
        out
    }
}

/// Neighbor triple from a floating itinerary: the center word codes `x`, and
/// each neighbor is the single-position flip whose cylinder shares the
/// matching endpoint.
#[must_use]
pub fn neighbor_words(r: f64, x: f64, n: u64) -> NeighborWords {
    let center = code_point(r, x, n);
    let (lo, hi) = cylinder_interval(r, &center);
    let mut left = None;
    let mut right = None;
    for flip in single_flips(&center) {
        let (flo, fhi) = cylinder_interval(r, &flip);
        if (fhi - lo).abs() <= ENDPOINT_TOLERANCE {
            left = Some(flip);
        } else if (flo - hi).abs() <= ENDPOINT_TOLERANCE {
            right = Some(flip);
        }
    }
    NeighborWords {
        left: left.unwrap_or_else(|| center.clone()),
        right: right.unwrap_or_else(|| center.clone()),
        center,
    }
}

/// Neighbor triple with exact endpoint matching at an endpoint parameter.
#[must_use]
pub fn neighbor_words_exact(farey: bool, x: &ExactPoint, n: u64) -> NeighborWords {
    let center = code_point_exact(farey, x, n);
    let (lo, hi) = cylinder_interval_exact(farey, &center);
    let mut left = None;
    let mut right = None;
    for flip in single_flips(&center) {
        let (flo, fhi) = cylinder_interval_exact(farey, &flip);
        if fhi == lo {
            left = Some(flip);
        } else if flo == hi {
            right = Some(flip);
        }
    }
    NeighborWords {
        left: left.unwrap_or_else(|| center.clone()),
        right: right.unwrap_or_else(|| center.clone()),
        center,
    }
}

/// All words differing from `word` in exactly one position.
fn single_flips(word: &[u8]) -> impl Iterator<Item = Vec<u8>> + '_ {
    (0..word.len()).map(move |j| {
        let mut w = word.to_vec();
        w[j] ^= 1;
        w
    })
}

/// The composed inverse branch of a word at an endpoint parameter, exposed
/// for callers that hold a word triple and need the matrices.
#[must_use]
pub fn word_matrix_exact(farey: bool, word: &[u8]) -> Mobius {
    map::word_matrix(if farey { R_FAREY } else { R_TENT }, word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn farey_itinerary_matches_the_entry_spelling() {
        // 2/3 = [0;1,2] codes as 1,0,1 then zeros forever.
        let x = ExactPoint::rational(2, 3).unwrap();
        assert_eq!(code_point_exact(true, &x, 6), vec![1, 0, 1, 0, 0, 0]);
        // 2/5 = [0;2,2] codes as 0,1,0,1.
        let y = ExactPoint::rational(2, 5).unwrap();
        assert_eq!(code_point_exact(true, &y, 4), vec![0, 1, 0, 1]);
    }

    #[test]
    fn tent_itinerary_follows_the_doubling_orbit() {
        // 0.3 → 0.6 → 0.8 → 0.4 → 0.8: digits 0,1,1,0,1.
        assert_eq!(code_point(0.0, 0.3, 5), vec![0, 1, 1, 0, 1]);
        let x = ExactPoint::rational(3, 10).unwrap();
        assert_eq!(code_point_exact(false, &x, 5), vec![0, 1, 1, 0, 1]);
    }

    #[test]
    fn depth_two_farey_cylinders_tile_in_reflected_order() {
        let layout: [(&[u8], f64, f64); 4] = [
            (&[0, 0], 0.0, 1.0 / 3.0),
            (&[0, 1], 1.0 / 3.0, 0.5),
            (&[1, 1], 0.5, 2.0 / 3.0),
            (&[1, 0], 2.0 / 3.0, 1.0),
        ];
        for (word, lo, hi) in layout {
            let (a, b) = cylinder_interval(1.0, word);
            assert!((a - lo).abs() < 1e-15 && (b - hi).abs() < 1e-15, "{word:?}");
        }
    }

    #[test]
    fn neighbor_triples_read_off_the_tiling() {
        // 0.4 sits in the cylinder 01 = [1/3, 1/2]; neighbors 00 and 11.
        let w = neighbor_words(1.0, 0.4, 2);
        assert_eq!(w.center, vec![0, 1]);
        assert_eq!(w.left, vec![0, 0]);
        assert_eq!(w.right, vec![1, 1]);
        let exact = neighbor_words_exact(true, &ExactPoint::rational(2, 5).unwrap(), 2);
        assert_eq!((exact.left, exact.center, exact.right), (vec![0, 0], vec![0, 1], vec![1, 1]));
    }

    #[test]
    fn boundary_cylinders_copy_the_center_word() {
        // 0.1 lies in 00 = [0, 1/3], which touches the origin: no left
        // neighbor, so the triple repeats the center there.
        let w = neighbor_words(1.0, 0.1, 2);
        assert_eq!(w.center, vec![0, 0]);
        assert_eq!(w.left, w.center);
        assert_eq!(w.right, vec![0, 1]);
        assert_eq!(w.unique().len(), 2);
    }

    #[test]
    fn exact_and_floating_neighbors_agree_at_moderate_depth() {
        // The point must have an orbit that stays away from 1/2: every
        // rational eventually lands exactly on it, where rounding puts the
        // floating itinerary on the wrong branch.  √2 − 1 cycles between
        // ≈ 0.414 and ≈ 0.707, both a safe distance from the boundary.
        let x = crate::cf::parse_exact_value("sqrt2-1").unwrap();
        for n in 1..=8 {
            let exact = neighbor_words_exact(true, &x, n);
            let float = neighbor_words(1.0, 2f64.sqrt() - 1.0, n);
            assert_eq!(exact, float, "depth {n}");
        }
    }

    proptest! {
        #[test]
        fn coded_cylinder_contains_its_point(
            r in 0.0f64..=1.0,
            x in 0.001f64..=0.999,
            n in 1u64..10,
        ) {
            let word = code_point(r, x, n);
            let (lo, hi) = cylinder_interval(r, &word);
            prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9,
                "{x} outside [{lo}, {hi}] for word {word:?}");
        }

        #[test]
        fn neighbor_cylinders_flank_the_center(
            x in 0.001f64..=0.999,
            n in 1u64..8,
        ) {
            let w = neighbor_words(1.0, x, n);
            let (clo, chi) = cylinder_interval(1.0, &w.center);
            if w.left != w.center {
                let (_, lhi) = cylinder_interval(1.0, &w.left);
                prop_assert!((lhi - clo).abs() < 1e-9);
            } else {
                prop_assert!(clo.abs() < 1e-9, "missing left only at the origin");
            }
            if w.right != w.center {
                let (rlo, _) = cylinder_interval(1.0, &w.right);
                prop_assert!((rlo - chi).abs() < 1e-9);
            } else {
                prop_assert!((chi - 1.0).abs() < 1e-9, "missing right only at one");
            }
        }
    }
}
