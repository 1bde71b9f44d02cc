//! Ball-average difference functionals on sampled periodic functions.
//!
//! The crate computes Littlewood-Paley square functions built from
//! `f - B_t f`, where `B_t` is the average over the ball of radius `t`:
//! the g-function, Lusin-area functionals, the `g*_lambda` functional, the
//! Fourier-side reference norm, and first-difference comparators. On top
//! of those it extracts pointwise gradient certificates of Hajlasz type,
//! verifies the implication chains between them, estimates smoothness
//! exponents from scale decay, and measures equivalence constants between
//! the functionals on a synthetic corpus.
//!
//! Everything lives on the torus `[0,1)^n`, `n` in `{1,2,3}`, sampled on a
//! uniform power-of-two grid, with dyadic scale ladders `t_k = 2^-k`
//! standing in for the measure `dt/t`.

mod balls;
pub mod analysis;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod kernels;
pub mod pointwise;
pub mod quadrature;
pub mod synth;

pub use error::{Error, Result};
