//! Boundary curves and periodic Fourier utilities.

mod curve;
mod fourier;

pub use curve::{
    polygon_area, polygon_centroid, polygon_self_intersects, BoundaryCurve, BoundaryRole, TrigCoefficients,
};
pub use fourier::{FourierData, HalfSign};
