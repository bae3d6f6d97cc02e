//! Parametrized closed curves `x(θ)`, `θ ∈ [0, 2π)`, oriented counterclockwise.

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, periodic_nodes, to_f64, Real};

/// Which side of the annular region a boundary sits on.
///
/// The flux normal of the region between the two curves points away from the
/// measurement disk on the outer boundary and into the inclusion on the inner
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryRole {
    Outer,
    Inner,
}

/// Coefficients of `x_p(θ) = Σ_{m=1..M} a_m^(p) cos mθ + b_m^(p) sin mθ`, `p = 1, 2`.
///
/// `a[p][m - 1]` holds `a_m^(p+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients<T> {
    pub a: [Vec<T>; 2],
    pub b: [Vec<T>; 2],
}

impl<T: Real> TrigCoefficients<T> {
    pub fn new(a: [Vec<T>; 2], b: [Vec<T>; 2]) -> Result<Self> {
        let m = a[0].len();
        if m == 0 || a[1].len() != m || b[0].len() != m || b[1].len() != m {
            return Err(Error::InvalidCurve(
                "trig coefficients need four equally long, non-empty rows".into(),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn degree(&self) -> usize {
        self.a[0].len()
    }

    /// Evaluates the `order`-th derivative (0, 1 or 2) of both coordinates.
    fn eval(&self, theta: T, order: u8) -> Vector2<T> {
        let mut out = Vector2::zeros();
        for m in 1..=self.degree() {
            let mf = from_usize::<T>(m);
            let (s, c) = (mf * theta).sin_cos();
            for p in 0..2 {
                let (a, b) = (self.a[p][m - 1], self.b[p][m - 1]);
                out[p] += match order {
                    0 => a * c + b * s,
                    1 => mf * (b * c - a * s),
                    _ => -mf * mf * (a * c + b * s),
                };
            }
        }
        out
    }
}

/// A simple closed C² curve in the plane.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCurve<T: Real> {
    Circle { center: Point2<T>, radius: T },
    /// Axis-aligned ellipse centred at the origin: `(a cos θ, b sin θ)`.
    Ellipse { a: T, b: T },
    /// `r(θ) = (0.35 + 0.3 cos θ + 0.05 sin 2θ) / (1 + 0.7 cos θ)`, `x = r (cos θ, sin θ)`.
    Cardioid,
    Trig(TrigCoefficients<T>),
}

impl<T: Real> BoundaryCurve<T> {
    pub fn circle(center: Point2<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidCurve("circle radius must be positive".into()));
        }
        Ok(Self::Circle { center, radius })
    }

    pub fn centered_circle(radius: T) -> Result<Self> {
        Self::circle(Point2::origin(), radius)
    }

    pub fn unit_circle() -> Self {
        Self::Circle { center: Point2::origin(), radius: T::one() }
    }

    pub fn ellipse(a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero()) {
            return Err(Error::InvalidCurve("ellipse semi-axes must be positive".into()));
        }
        Ok(Self::Ellipse { a, b })
    }

    pub fn is_unit_circle(&self) -> bool {
        let tol = lit::<T>(1e-12);
        matches!(self, Self::Circle { center, radius }
            if center.coords.norm() <= tol && (*radius - T::one()).abs() <= tol)
    }

    fn cardioid_radius(theta: T) -> [T; 3] {
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (lit::<T>(2.0) * theta).sin_cos();
        let num = lit::<T>(0.35) + lit::<T>(0.3) * c + lit::<T>(0.05) * s2;
        let dnum = -lit::<T>(0.3) * s + lit::<T>(0.1) * c2;
        let ddnum = -lit::<T>(0.3) * c - lit::<T>(0.2) * s2;
        let den = T::one() + lit::<T>(0.7) * c;
        let dden = -lit::<T>(0.7) * s;
        let ddden = -lit::<T>(0.7) * c;
        let r = num / den;
        let q = dnum * den - num * dden;
        let dr = q / (den * den);
        let ddr = (ddnum * den - num * ddden) / (den * den)
            - lit::<T>(2.0) * dden * q / (den * den * den);
        [r, dr, ddr]
    }

    /// Position and its first two θ-derivatives.
    pub fn jet(&self, theta: T) -> [Vector2<T>; 3] {
        match self {
            Self::Circle { center, radius } => {
                let (s, c) = theta.sin_cos();
                [
                    center.coords + Vector2::new(c, s) * *radius,
                    Vector2::new(-s, c) * *radius,
                    Vector2::new(-c, -s) * *radius,
                ]
            }
            Self::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                [
                    Vector2::new(*a * c, *b * s),
                    Vector2::new(-*a * s, *b * c),
                    Vector2::new(-*a * c, -*b * s),
                ]
            }
            Self::Cardioid => {
                let [r, dr, ddr] = Self::cardioid_radius(theta);
                let (s, c) = theta.sin_cos();
                let e = Vector2::new(c, s);
                let e_perp = Vector2::new(-s, c);
                [
                    e * r,
                    e * dr + e_perp * r,
                    e * (ddr - r) + e_perp * (lit::<T>(2.0) * dr),
                ]
            }
            Self::Trig(coeffs) => [coeffs.eval(theta, 0), coeffs.eval(theta, 1), coeffs.eval(theta, 2)],
        }
    }

    pub fn point(&self, theta: T) -> Point2<T> {
        Point2::from(self.jet(theta)[0])
    }

    pub fn tangent(&self, theta: T) -> Vector2<T> {
        self.jet(theta)[1]
    }

    /// `|x'(θ)|`.
    pub fn jacobian(&self, theta: T) -> T {
        self.tangent(theta).norm()
    }

    /// Unit normal pointing away from the region the curve encloses.
    pub fn outward_normal(&self, theta: T) -> Result<Vector2<T>> {
        let t = self.tangent(theta);
        let j = t.norm();
        if !(j > lit::<T>(1e-12)) {
            return Err(Error::DegenerateTangent { theta: to_f64(theta), jacobian: to_f64(j) });
        }
        Ok(Vector2::new(t.y, -t.x) / j)
    }

    /// Unit normal following the flux convention of `role`: away from the disk
    /// on the outer boundary, into the inclusion on the inner boundary.
    pub fn normal(&self, theta: T, role: BoundaryRole) -> Result<Vector2<T>> {
        let n = self.outward_normal(theta)?;
        Ok(match role {
            BoundaryRole::Outer => n,
            BoundaryRole::Inner => -n,
        })
    }

    /// Signed curvature, positive for convex counterclockwise curves.
    pub fn curvature(&self, theta: T) -> T {
        let [_, d1, d2] = self.jet(theta);
        let j = d1.norm();
        (d1.x * d2.y - d1.y * d2.x) / (j * j * j)
    }

    pub fn sample(&self, n: usize) -> Vec<Point2<T>> {
        periodic_nodes::<T>(n).into_iter().map(|t| self.point(t)).collect()
    }

    /// Polygon centroid of the `n` node points.
    pub fn centroid(&self, n: usize) -> Point2<T> {
        polygon_centroid(&self.sample(n))
    }

    /// Checks positivity of the Jacobian, counterclockwise orientation and the
    /// absence of self-intersections of the `n`-node polygon.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 3 {
            return Err(Error::InsufficientSamples { required: 3, got: n });
        }
        let thetas = periodic_nodes::<T>(n);
        let min_jac = thetas
            .iter()
            .map(|&t| (t, self.jacobian(t)))
            .fold((T::zero(), T::max_value().unwrap()), |acc, x| if x.1 < acc.1 { x } else { acc });
        if !(min_jac.1 > lit::<T>(1e-10)) {
            return Err(Error::DegenerateTangent { theta: to_f64(min_jac.0), jacobian: to_f64(min_jac.1) });
        }
        let pts = self.sample(n);
        if !(polygon_area(&pts) > T::zero()) {
            return Err(Error::InvalidCurve("curve is not counterclockwise".into()));
        }
        if polygon_self_intersects(&pts) {
            return Err(Error::InvalidCurve("curve self-intersects at sample resolution".into()));
        }
        Ok(())
    }
}

/// Signed area (shoelace); positive for counterclockwise polygons.
pub fn polygon_area<T: Real>(pts: &[Point2<T>]) -> T {
    let n = pts.len();
    let mut acc = T::zero();
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        acc += p.x * q.y - q.x * p.y;
    }
    acc * lit::<T>(0.5)
}

pub fn polygon_centroid<T: Real>(pts: &[Point2<T>]) -> Point2<T> {
    let n = pts.len();
    let area = polygon_area(pts);
    if area == T::zero() {
        let sum = pts.iter().fold(Vector2::zeros(), |acc, p| acc + p.coords);
        return Point2::from(sum / from_usize::<T>(n.max(1)));
    }
    let mut c = Vector2::zeros();
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let cross = p.x * q.y - q.x * p.y;
        c += (p.coords + q.coords) * cross;
    }
    Point2::from(c / (lit::<T>(6.0) * area))
}

fn segments_cross<T: Real>(p1: Point2<T>, p2: Point2<T>, q1: Point2<T>, q2: Point2<T>) -> bool {
    let orient = |a: Point2<T>, b: Point2<T>, c: Point2<T>| {
        let v = (b - a).perp(&(c - a));
        if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            0
        }
    };
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    d1 * d2 < 0 && d3 * d4 < 0
}

/// Brute-force check over non-adjacent chord pairs of a closed polygon.
pub fn polygon_self_intersects<T: Real>(pts: &[Point2<T>]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn all_kinds() -> Vec<BoundaryCurve<f64>> {
        vec![
            BoundaryCurve::centered_circle(0.3).unwrap(),
            BoundaryCurve::ellipse(0.5, 0.3).unwrap(),
            BoundaryCurve::Cardioid,
            BoundaryCurve::Trig(
                TrigCoefficients::new([vec![0.4, 0.05], vec![0.0, 0.0]], [vec![0.0, 0.0], vec![0.3, -0.04]])
                    .unwrap(),
            ),
        ]
    }

    #[test]
    fn point_examples() {
        let c = BoundaryCurve::centered_circle(0.3).unwrap();
        let p = c.point(0.0);
        assert_relative_eq!(p.x, 0.3);
        assert_relative_eq!(p.y, 0.0);

        let e = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
        let p = e.point(FRAC_PI_2);
        assert!(p.x.abs() < 1e-15);
        assert_relative_eq!(p.y, 0.3);

        let p = BoundaryCurve::<f64>::Cardioid.point(0.0);
        assert_relative_eq!(p.x, 0.65 / 1.7, epsilon = 1e-15);
        assert_relative_eq!(p.x, 0.38235, epsilon = 1e-5);
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn point_is_periodic() {
        let e = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
        let (p, q) = (e.point(1.1), e.point(1.1 + 2.0 * PI));
        assert_relative_eq!(p, q, epsilon = 1e-14);
    }

    #[test]
    fn normal_examples() {
        let unit = BoundaryCurve::<f64>::unit_circle();
        assert_relative_eq!(unit.normal(0.0, BoundaryRole::Outer).unwrap(), Vector2::new(1.0, 0.0));
        let half = BoundaryCurve::centered_circle(0.5).unwrap();
        assert_relative_eq!(half.normal(0.0, BoundaryRole::Inner).unwrap(), Vector2::new(-1.0, 0.0));

        let e = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
        let t = FRAC_PI_4;
        let expect = -Vector2::new(0.3 * t.cos(), 0.5 * t.sin()).normalize();
        assert_relative_eq!(e.normal(t, BoundaryRole::Inner).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_tangent_is_reported() {
        let c = BoundaryCurve::Trig(
            TrigCoefficients::new([vec![0.0], vec![0.0]], [vec![0.0], vec![0.0]]).unwrap(),
        );
        assert!(matches!(c.outward_normal(0.3), Err(Error::DegenerateTangent { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let c = BoundaryCurve::centered_circle(0.7).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert_relative_eq!(c.jacobian(t), 0.7, epsilon = 1e-15);
        }
        let e = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
        assert_relative_eq!(e.jacobian(0.0), 0.3);

        let trig = BoundaryCurve::Trig(
            TrigCoefficients::new([vec![0.5], vec![0.0]], [vec![0.0], vec![0.5]]).unwrap(),
        );
        for t in periodic_nodes::<f64>(32) {
            assert_relative_eq!(trig.jacobian(t), 0.5, epsilon = 1e-15);
            assert_relative_eq!(trig.point(t), BoundaryCurve::centered_circle(0.5).unwrap().point(t), epsilon = 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for c in all_kinds() {
            for t in [0.0, 0.4, 2.0, 3.5, 5.9] {
                let [_, d1, d2] = c.jet(t);
                let fd1 = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
                let fd2 = (c.tangent(t + h) - c.tangent(t - h)) / (2.0 * h);
                assert_relative_eq!(d1, fd1, epsilon = 1e-8);
                assert_relative_eq!(d2, fd2, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn circle_curvature() {
        let c = BoundaryCurve::centered_circle(0.25).unwrap();
        assert_relative_eq!(c.curvature(1.0), 4.0, epsilon = 1e-13);
    }

    #[test]
    fn all_kinds_validate_and_have_positive_jacobian() {
        for c in all_kinds() {
            c.validate(256).unwrap();
            for t in periodic_nodes::<f64>(256) {
                assert!(c.jacobian(t) > 0.0);
            }
        }
    }

    #[test]
    fn inner_normal_points_toward_centroid() {
        for c in all_kinds() {
            let centroid = c.centroid(256);
            for t in periodic_nodes::<f64>(64) {
                let n = c.normal(t, BoundaryRole::Inner).unwrap();
                assert!(n.dot(&(c.point(t) - centroid)) < 0.0);
            }
        }
    }

    #[test]
    fn figure_eight_is_rejected() {
        // x = sin 2θ / 2 style lemniscate crosses itself at the origin.
        let c = BoundaryCurve::Trig(
            TrigCoefficients::new([vec![0.5, 0.0], vec![0.0, 0.0]], [vec![0.0, 0.0], vec![0.0, 0.3]]).unwrap(),
        );
        assert!(c.validate(64).is_err());
    }

    #[test]
    fn clockwise_curve_is_rejected() {
        let c = BoundaryCurve::Trig(
            TrigCoefficients::new([vec![0.5], vec![0.0]], [vec![0.0], vec![-0.5]]).unwrap(),
        );
        assert!(matches!(c.validate(64), Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn generic_over_f32() {
        let c = BoundaryCurve::<f32>::ellipse(0.5, 0.3).unwrap();
        assert!((c.point(0.0).x - 0.5).abs() < 1e-7);
        c.validate(64).unwrap();
    }
}
