//! Scalar abstraction shared by every numerical module.

use nalgebra::RealField;

pub use nalgebra::Complex;

/// Real floating-point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + num_traits::ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count or index into the working scalar type.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}

#[inline]
pub fn from_i64<T: Real>(n: i64) -> T {
    nalgebra::convert(n as f64)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `e^{i x}`.
#[inline]
pub fn cis<T: Real>(x: T) -> Complex<T> {
    Complex::new(x.cos(), x.sin())
}

/// Equally spaced nodes `2πj/n`, `j = 0..n`.
pub fn periodic_nodes<T: Real>(n: usize) -> Vec<T> {
    let h = T::two_pi() / from_usize::<T>(n);
    (0..n).map(|j| from_usize::<T>(j) * h).collect()
}
