use nalgebra::{DMatrix, DVector, Point2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, TrigCoefficients};
use crate::scalar::{from_usize, to_f64, Real};

/// Trigonometric curve `x_p(θ) = Σ_{m=1}^{M} a_m^(p) cos mθ + b_m^(p) sin mθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedCurve<T: Real> {
    pub coefficients: TrigCoefficients<T>,
    pub lambda: T,
}

impl<T: Real> FittedCurve<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.degree()
    }

    pub fn curve(&self) -> BoundaryCurve<T> {
        BoundaryCurve::Trig(self.coefficients.clone())
    }

    /// `Σ_m m⁴ (a_m² + b_m²)` summed over both coordinates.
    pub fn h2_seminorm_sq(&self) -> T {
        h2_seminorm_sq(&self.coefficients)
    }
}

pub(crate) fn h2_seminorm_sq<T: Real>(c: &TrigCoefficients<T>) -> T {
    let mut acc = T::zero();
    for p in 0..2 {
        for m in 1..=c.degree() {
            let m4 = from_usize::<T>(m * m * m * m);
            acc += m4 * (c.a[p][m - 1] * c.a[p][m - 1] + c.b[p][m - 1] * c.b[p][m - 1]);
        }
    }
    acc
}

/// Penalty weight for a relative noise level `δ`: `λ = δ²`.
pub fn fit_lambda_from_noise<T: Real>(delta: T) -> T {
    delta * delta
}

/// Least-squares fit at the polar angles of the points about the origin.
pub fn fit_trig_curve<T: Real>(points: &[Point2<T>], degree: usize, lambda: T) -> Result<FittedCurve<T>> {
    let params: Vec<T> = points.iter().map(|p| p.y.atan2(p.x)).collect();
    fit_trig_curve_at(points, &params, degree, lambda)
}

/// Minimizes `(1/K) Σ_k |x(θ_k) - p_k|² + λ Σ_{m,p} (1 + m²)² (a_m^(p)² + b_m^(p)²)`
/// for given parameters `θ_k`.
pub fn fit_trig_curve_at<T: Real>(
    points: &[Point2<T>],
    params: &[T],
    degree: usize,
    lambda: T,
) -> Result<FittedCurve<T>> {
    let k = points.len();
    if degree == 0 {
        return Err(Error::InvalidConfig("curve degree must be at least 1".into()));
    }
    if k < 2 * degree + 1 {
        return Err(Error::InsufficientSamples { required: 2 * degree + 1, got: k });
    }
    if params.len() != k {
        return Err(Error::DimensionMismatch(format!("{} parameters for {k} points", params.len())));
    }
    if lambda < T::zero() {
        return Err(Error::InvalidConfig("fit penalty must be non-negative".into()));
    }
    let cols = 2 * degree;
    let phi = DMatrix::from_fn(k, cols, |r, c| {
        let m = from_usize::<T>(c / 2 + 1);
        if c % 2 == 0 {
            (m * params[r]).cos()
        } else {
            (m * params[r]).sin()
        }
    });
    let inv_k = T::one() / from_usize::<T>(k);
    let mut normal = phi.transpose() * &phi * inv_k;
    for c in 0..cols {
        let m = from_usize::<T>(c / 2 + 1);
        let w = T::one() + m * m;
        normal[(c, c)] += lambda * w * w;
    }
    let chol = normal
        .cholesky()
        .ok_or_else(|| Error::DegenerateFit("normal equations are not positive definite".into()))?;
    let mut a = [Vec::with_capacity(degree), Vec::with_capacity(degree)];
    let mut b = [Vec::with_capacity(degree), Vec::with_capacity(degree)];
    for p in 0..2 {
        let rhs = phi.transpose() * DVector::from_iterator(k, points.iter().map(|q| q[p])) * inv_k;
        let sol = chol.solve(&rhs);
        for m in 0..degree {
            a[p].push(sol[2 * m]);
            b[p].push(sol[2 * m + 1]);
        }
    }
    let coefficients = TrigCoefficients::new(a, b)?;
    let fitted = FittedCurve { coefficients, lambda };
    match fitted.curve().validate(256) {
        Ok(()) => Ok(fitted),
        Err(Error::DegenerateTangent { theta, jacobian }) => {
            Err(Error::DegenerateFit(format!("Jacobian {jacobian:.3e} at θ = {theta:.4}")))
        }
        Err(e) => Err(Error::DegenerateFit(format!("{e} (penalty {})", to_f64(lambda)))),
    }
}
