//! Localized approximation spaces for Friedrichs' systems.
//!
//! The crate builds local transfer operators for the mixed convection–diffusion–
//! reaction problem discretized by FOSLS with RT0 fluxes and Q1 scalars on
//! oversampling domains, approximates their range with the adaptive randomized
//! range finder, and compares against the optimal spaces given by the SVD.

// `!(x > 0.0)` is used on purpose: it rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod rangefinder;
pub mod spaces;
pub mod transfer;

pub use error::{Error, Result};
