//! Return-map and flow toolkit for a perturbed Bykov heteroclinic attractor.
//!
//! The crate is organised the same way the analysis is:
//!
//! * [`constants`] and [`map`]: saddle eigenvalue data, the factor maps and the
//!   truncated first return map `F(x, y) = (x - K w ln s, s^delta)` with
//!   `s = y + A + lambda sin x`, together with its Jacobian.
//! * [`resonance`]: `(1, l)`-fixed points, their stability, the resonance wedges
//!   and every codimension-one and -two bifurcation surface of the map.
//! * [`orbit`]: iteration in the lift, rotation numbers, Lyapunov exponents,
//!   attractor classification, invariant manifolds and parameter scans.
//! * [`ode`]: the four-dimensional vector field with the heteroclinic network,
//!   an adaptive Dormand-Prince integrator and the Benettin spectrum.
//!
//! The return map is the *truncated* normal form: the higher-order remainder
//! terms of the local and global maps are set to zero everywhere. All results
//! are about that truncated map.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod map;
pub mod ode;
pub mod orbit;
pub mod resonance;

pub use constants::{derive_constants, MapConstants, SaddleValues};
pub use error::{Error, Result};
pub use grid::{Axis, ScanGrid};
pub use map::{factor_map, jacobian, return_map, Jacobian2, LiftPoint, Params, Stage};
