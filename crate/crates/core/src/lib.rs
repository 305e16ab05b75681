//! Paraxial fluids of light.
//!
//! A laser propagating through a Kerr medium obeys a 2D+1 nonlinear
//! Schrödinger equation in which the axial coordinate `z` plays the role of
//! time. This crate provides:
//!
//! * [`field`]: transverse grids, complex envelopes, initial-condition and
//!   potential builders, and the binary snapshot / PGM formats.
//! * [`solver`]: symmetric split-step spectral propagation including
//!   absorption, complex potentials and saturable nonlinearity.
//! * [`hydro`]: Madelung decomposition and fluid diagnostics (vortices,
//!   Bogoliubov dispersion, intensity statistics, coherence, structure factor).
//! * [`gem`]: a one-dimensional gradient echo memory simulator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consts;
pub mod error;
pub mod fft;
pub mod field;
pub mod gem;
pub mod hydro;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use field::{Field2D, Grid, MediumParams, UnitTag};

pub use num_complex::Complex64;
