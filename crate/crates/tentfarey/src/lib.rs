//! Exact and floating machinery for the interpolated tent–Farey map family
//! on the unit interval.
//!
//! The family `T_r` deforms the doubling tent map (`r = 0`) into the Farey
//! map (`r = 1`) through Möbius branches.  This crate provides the pieces
//! needed to study how densities and observables evolve under iteration of
//! the associated transfer operators, with exact arithmetic wherever the
//! mathematics allows it:
//!
//! * [`map`] — the map family, its inverse branches as matrices, and the
//!   invariant density and measure in closed form;
//! * [`mobius`] — Möbius matrices over machine integers, big integers, and
//!   log-scaled floats, with automatic promotion;
//! * [`surd`] — exact rationals and quadratic surds for orbit arithmetic;
//! * [`cf`] — continued fractions, convergents, the binary itinerary
//!   spelling, and closed-form branch matrices along an itinerary;
//! * [`coding`] — itineraries of points, cylinder intervals, and the words
//!   flanking a point at a given depth;
//! * [`observable`] — observables with power-law singularities and the
//!   extended real line their iterates live on;
//! * [`transfer`] — exact branch-sum trees and grid backends for the
//!   Perron–Frobenius operator and its measure-preserving Farey dual;
//! * [`tail`] — the singular part of an iterate at a point, evaluated in
//!   the log domain from exact branch data;
//! * [`renewal`] — the first-return structure on the right half-interval;
//! * [`bv`] — piecewise-monotone profiles and their bounded-variation norm;
//! * [`quad`] — adaptive quadrature, including singular weights;
//! * [`series`] — tabulated experiment rows and their CSV/JSON encodings;
//! * [`experiments`] — batch drivers that sweep the quantities above.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod bv;
pub mod cf;
pub mod coding;
pub mod error;
pub mod experiments;
pub mod map;
pub mod mobius;
pub mod num_util;
pub mod observable;
pub mod quad;
pub mod renewal;
pub mod series;
pub mod surd;
pub mod tail;
pub mod transfer;

pub use error::{Error, Result};

/// The guide's chapters, included here so every code snippet in the book
/// compiles and runs under `cargo test`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/family.md")]
    mod family {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/itineraries.md")]
    mod itineraries {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/tails.md")]
    mod tails {}
    #[doc = include_str!("../../../book/src/renewal.md")]
    mod renewal {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
}
