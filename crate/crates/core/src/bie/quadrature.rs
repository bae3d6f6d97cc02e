//! Periodic quadrature and differentiation on equispaced grids.

use nalgebra::DMatrix;

use crate::scalar::{from_usize, lit, Real};

/// Weights `R_j(t_i)` with `∫₀^{2π} ln(4 sin²((t_i - τ)/2)) f(τ) dτ ≈ Σ_j R_j(t_i) f(t_j)`,
/// exact for trigonometric polynomials of degree `< n/2` (and the Nyquist cosine).
///
/// `n` must be even.
pub fn log_weights<T: Real>(n: usize) -> DMatrix<T> {
    assert!(n.is_multiple_of(2), "log quadrature needs an even node count");
    let m = n / 2;
    let mf = from_usize::<T>(m);
    let h = T::two_pi() / from_usize::<T>(n);
    // depends only on i - j
    let row: Vec<T> = (0..n)
        .map(|d| {
            let s = from_usize::<T>(d) * h;
            let mut acc = T::zero();
            for k in 1..m {
                acc += (from_usize::<T>(k) * s).cos() / from_usize::<T>(k);
            }
            -(T::two_pi() / mf) * acc - T::pi() / (mf * mf) * (mf * s).cos()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| row[(i + n - j) % n])
}

/// Spectral differentiation matrix for `n` (even) equispaced periodic nodes.
pub fn diff_matrix<T: Real>(n: usize) -> DMatrix<T> {
    assert!(n.is_multiple_of(2), "spectral differentiation needs an even node count");
    let h = T::two_pi() / from_usize::<T>(n);
    let half = lit::<T>(0.5);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return T::zero();
        }
        let d = i as i64 - j as i64;
        let sign = if d.rem_euclid(2) == 0 { T::one() } else { -T::one() };
        let arg = lit::<T>(d as f64) * h * half;
        sign * half / arg.tan()
    })
}

/// `ln(4 sin²(s/2))`.
pub fn log_sin2<T: Real>(s: T) -> T {
    let v = (s * lit::<T>(0.5)).sin();
    (lit::<T>(4.0) * v * v).ln()
}
