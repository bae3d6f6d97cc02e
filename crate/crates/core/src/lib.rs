//! Reconstruction of impenetrable inclusions and their boundary impedance from
//! electrostatic boundary measurements on the unit disk.
//!
//! The crate is generic over the real scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`, which is
//! what the file formats and the command-line driver use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus;
pub mod bie;
pub mod error;
pub mod geometry;
pub mod impedance;
pub mod io;
pub mod regularization;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

pub type Curve = geometry::BoundaryCurve<f64>;
pub type Fourier = geometry::FourierData<f64>;
