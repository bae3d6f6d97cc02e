use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, BoundaryRole};
use crate::scalar::{from_usize, periodic_nodes, Real};

/// Equispaced Nyström discretization of a boundary curve with cached geometry.
#[derive(Debug, Clone)]
pub struct NystromMesh<T: Real> {
    curve: BoundaryCurve<T>,
    role: BoundaryRole,
    thetas: Vec<T>,
    points: Vec<Point2<T>>,
    jacobians: Vec<T>,
    outward: Vec<Vector2<T>>,
    normals: Vec<Vector2<T>>,
    curvatures: Vec<T>,
}

/// Resolution at which curves are checked for self-intersection.
const VALIDATION_NODES: usize = 1024;

impl<T: Real> NystromMesh<T> {
    /// Discretizes `curve` with `n` nodes `θ_j = 2πj/n`; `n` must be even.
    pub fn new(curve: BoundaryCurve<T>, role: BoundaryRole, n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("Nyström node count must be even and ≥ 4, got {n}")));
        }
        curve.validate(n.min(VALIDATION_NODES))?;
        let thetas = periodic_nodes::<T>(n);
        let mut points = Vec::with_capacity(n);
        let mut jacobians = Vec::with_capacity(n);
        let mut outward = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        for &t in &thetas {
            points.push(curve.point(t));
            jacobians.push(curve.jacobian(t));
            outward.push(curve.outward_normal(t)?);
            curvatures.push(curve.curvature(t));
        }
        let normals = match role {
            BoundaryRole::Outer => outward.clone(),
            BoundaryRole::Inner => outward.iter().map(|v| -v).collect(),
        };
        Ok(Self { curve, role, thetas, points, jacobians, outward, normals, curvatures })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn curve(&self) -> &BoundaryCurve<T> {
        &self.curve
    }

    pub fn role(&self) -> BoundaryRole {
        self.role
    }

    /// Trapezoidal weight `2π/n`.
    pub fn weight(&self) -> T {
        T::two_pi() / from_usize::<T>(self.len())
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn jacobians(&self) -> &[T] {
        &self.jacobians
    }

    /// Unit normals pointing out of the region each curve encloses; these are
    /// the normals used inside every layer kernel.
    pub fn outward_normals(&self) -> &[Vector2<T>] {
        &self.outward
    }

    /// Flux normals of the annular region (see [`BoundaryRole`]).
    pub fn normals(&self) -> &[Vector2<T>] {
        &self.normals
    }

    pub fn curvatures(&self) -> &[T] {
        &self.curvatures
    }

    /// Length of the curve by the trapezoidal rule.
    pub fn length(&self) -> T {
        self.jacobians.iter().fold(T::zero(), |a, &j| a + j) * self.weight()
    }

    /// Minimum distance between the node sets of two meshes.
    pub fn distance_to(&self, other: &Self) -> T {
        let mut best = T::max_value().unwrap();
        for p in &self.points {
            for q in &other.points {
                best = best.min((p - q).norm());
            }
        }
        best
    }
}
