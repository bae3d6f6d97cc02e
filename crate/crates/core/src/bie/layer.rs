//! Layer-potential matrices.
//!
//! Every kernel uses the geometric outward normal `n` of the region enclosed by
//! its curve, for sources and targets alike. With the doubled double layer
//! `(Dφ)(x) = 2 ∫ φ(y) ∂_{n(y)} Φ(x, y) ds_y` the boundary limits are
//!
//! | quantity                | inside the curve | outside the curve |
//! |-------------------------|------------------|-------------------|
//! | `Dφ`                    | `Kφ - φ`         | `Kφ + φ`          |
//! | `Sψ`                    | `Sψ`             | `Sψ`              |
//! | `∂_n Sψ`                | `K'ψ + ψ/2`      | `K'ψ - ψ/2`       |
//! | `∂_n Dφ`                | `Tφ`             | `Tφ`              |
//!
//! where `K`, `S`, `K'`, `T` are the matrices assembled with
//! [`Target::OnSource`]. The single layer carries no factor 2.

use nalgebra::{DMatrix, DVector, Point2, Vector2};

use crate::bie::mesh::NystromMesh;
use crate::bie::quadrature::{diff_matrix, log_sin2, log_weights};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Where a layer potential is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a, T: Real> {
    /// The source nodes themselves (self-interaction, weakly singular quadrature).
    OnSource,
    /// Nodes of a different curve.
    Mesh(&'a NystromMesh<T>),
    /// Arbitrary points off the source curve; normals are needed only for
    /// normal derivatives.
    Points { points: &'a [Point2<T>], normals: Option<&'a [Vector2<T>]> },
}

/// Which potential a normal derivative is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    DoubleLayer,
    ModifiedDoubleLayer,
    LogModifiedDoubleLayer,
    SingleLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    DoubleLayer,
    ModifiedDoubleLayer,
    LogModifiedDoubleLayer,
    SingleLayer,
    NormalDerivative(Potential),
}

/// Dense quadrature matrix, `target nodes × source nodes`.
#[derive(Debug, Clone)]
pub struct LayerOperator<T: Real> {
    kind: LayerKind,
    matrix: DMatrix<T>,
}

impl<T: Real> LayerOperator<T> {
    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn apply(&self, density: &[T]) -> Vec<T> {
        let v = &self.matrix * DVector::from_column_slice(density);
        v.iter().copied().collect()
    }
}

/// `Φ(x, y) = -(1/2π) ln|x - y|`.
pub fn fundamental_solution<T: Real>(x: &Point2<T>, y: &Point2<T>) -> Result<T> {
    let r = (x - y).norm();
    if r == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    Ok(-r.ln() / T::two_pi())
}

struct Targets<'a, T: Real> {
    points: &'a [Point2<T>],
    normals: Option<&'a [Vector2<T>]>,
}

fn resolve<'a, T: Real>(target: &Target<'a, T>) -> Option<Targets<'a, T>> {
    match *target {
        Target::OnSource => None,
        Target::Mesh(m) => Some(Targets { points: m.points(), normals: Some(m.outward_normals()) }),
        Target::Points { points, normals } => Some(Targets { points, normals }),
    }
}

fn separated<T: Real>(
    source: &NystromMesh<T>,
    targets: &Targets<'_, T>,
    kernel: impl Fn(usize, usize, Vector2<T>) -> T,
) -> Result<DMatrix<T>> {
    let h = source.weight();
    let ys = source.points();
    let jac = source.jacobians();
    let mut m = DMatrix::zeros(targets.points.len(), ys.len());
    for (i, x) in targets.points.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            let r = x - y;
            if r.norm_squared() == T::zero() {
                return Err(Error::CoincidentPoints);
            }
            m[(i, j)] = kernel(i, j, r) * jac[j] * h;
        }
    }
    Ok(m)
}

fn scale<T: Real>(factor2: bool) -> T {
    if factor2 {
        lit(2.0)
    } else {
        T::one()
    }
}

/// `(Dφ)(x) = c ∫ φ(y) ∂_{n(y)} Φ(x, y) ds_y` with `c = 2` when `factor2`.
///
/// On the source curve the kernel is continuous with diagonal value `-κ/(4π)`.
pub fn assemble_double_layer<T: Real>(
    source: &NystromMesh<T>,
    target: Target<'_, T>,
    factor2: bool,
) -> Result<LayerOperator<T>> {
    let c = scale::<T>(factor2);
    let ny = source.outward_normals();
    let matrix = match resolve(&target) {
        None => {
            let n = source.len();
            let h = source.weight();
            let pts = source.points();
            let jac = source.jacobians();
            let kappa = source.curvatures();
            let four_pi = lit::<T>(4.0) * T::pi();
            DMatrix::from_fn(n, n, |i, j| {
                let k = if i == j {
                    -kappa[j] / four_pi
                } else {
                    let r = pts[i] - pts[j];
                    r.dot(&ny[j]) / (T::two_pi() * r.norm_squared())
                };
                c * k * jac[j] * h
            })
        }
        Some(t) => separated(source, &t, |_, j, r| c * r.dot(&ny[j]) / (T::two_pi() * r.norm_squared()))?,
    };
    Ok(LayerOperator { kind: LayerKind::DoubleLayer, matrix })
}

/// Double layer plus `c ∫ ψ ds`, i.e. the kernel `∂_{n(y)} Φ(x, y) + 1`.
pub fn assemble_modified_double_layer<T: Real>(
    source: &NystromMesh<T>,
    target: Target<'_, T>,
    factor2: bool,
) -> Result<LayerOperator<T>> {
    let c = scale::<T>(factor2);
    let h = source.weight();
    let jac = source.jacobians();
    let mut matrix = assemble_double_layer(source, target, factor2)?.matrix;
    for (j, &jj) in jac.iter().enumerate() {
        matrix.column_mut(j).add_scalar_mut(c * jj * h);
    }
    Ok(LayerOperator { kind: LayerKind::ModifiedDoubleLayer, matrix })
}

/// Double layer plus `-c ln|x| ∫ ψ ds`, i.e. the kernel `∂_{n(y)} Φ(x, y) - ln|x|`.
///
/// The added term is harmonic away from the origin and carries net flux, so
/// the source curve must enclose the origin and targets must avoid it.
pub fn assemble_log_modified_double_layer<T: Real>(
    source: &NystromMesh<T>,
    target: Target<'_, T>,
    factor2: bool,
) -> Result<LayerOperator<T>> {
    let c = scale::<T>(factor2);
    let h = source.weight();
    let jac = source.jacobians();
    let xs = target_points(source, &target);
    let mut matrix = assemble_double_layer(source, target, factor2)?.matrix;
    for (i, x) in xs.iter().enumerate() {
        let r = x.coords.norm();
        if r == T::zero() {
            return Err(Error::InvalidConfig("logarithmic modification evaluated at the origin".into()));
        }
        let g = -r.ln();
        for j in 0..matrix.ncols() {
            matrix[(i, j)] += c * g * jac[j] * h;
        }
    }
    Ok(LayerOperator { kind: LayerKind::LogModifiedDoubleLayer, matrix })
}

fn target_points<'a, T: Real>(source: &'a NystromMesh<T>, target: &Target<'a, T>) -> &'a [Point2<T>] {
    match *target {
        Target::OnSource => source.points(),
        Target::Mesh(m) => m.points(),
        Target::Points { points, .. } => points,
    }
}

/// `(Sψ)(x) = ∫ ψ(y) Φ(x, y) ds_y`; self-interaction uses logarithmic splitting.
pub fn assemble_single_layer<T: Real>(source: &NystromMesh<T>, target: Target<'_, T>) -> Result<LayerOperator<T>> {
    let matrix = match resolve(&target) {
        None => log_split(source, true),
        Some(t) => separated(source, &t, |_, _, r| -r.norm().ln() / T::two_pi())?,
    };
    Ok(LayerOperator { kind: LayerKind::SingleLayer, matrix })
}

/// Self-interaction matrix of `∫ Φ(x(t), x(τ)) g(τ) J(τ)^p dτ`, `p ∈ {0, 1}`.
fn log_split<T: Real>(source: &NystromMesh<T>, with_jacobian: bool) -> DMatrix<T> {
    let n = source.len();
    let h = source.weight();
    let r = log_weights::<T>(n);
    let pts = source.points();
    let jac = source.jacobians();
    let th = source.thetas();
    let four_pi = lit::<T>(4.0) * T::pi();
    DMatrix::from_fn(n, n, |i, j| {
        let w = if with_jacobian { jac[j] } else { T::one() };
        let m1 = -w / four_pi;
        let m2 = if i == j {
            -w * jac[i].ln() / T::two_pi()
        } else {
            let m = -(pts[i] - pts[j]).norm().ln() / T::two_pi() * w;
            m - m1 * log_sin2(th[i] - th[j])
        };
        r[(i, j)] * m1 + h * m2
    })
}

/// Normal derivative, with respect to the target's outward normal, of a layer
/// potential.
///
/// For the doubled (modified) double layer on its own curve this is the
/// hypersingular operator, assembled as `c·J⁻¹ ∂_t S₀ ∂_t` with spectral
/// differentiation. In two dimensions the modified and plain double layers
/// have the same normal derivative; the logarithmic modification adds
/// `-c (x·n_x / |x|²) ∫ ψ ds`.
pub fn assemble_normal_derivative<T: Real>(
    source: &NystromMesh<T>,
    target: Target<'_, T>,
    of: Potential,
    factor2: bool,
) -> Result<LayerOperator<T>> {
    let kind = LayerKind::NormalDerivative(of);
    let c = scale::<T>(factor2);
    let matrix = match (resolve(&target), of) {
        (None, Potential::SingleLayer) => {
            let n = source.len();
            let h = source.weight();
            let pts = source.points();
            let nx = source.outward_normals();
            let jac = source.jacobians();
            let kappa = source.curvatures();
            let four_pi = lit::<T>(4.0) * T::pi();
            DMatrix::from_fn(n, n, |i, j| {
                let k = if i == j {
                    -kappa[i] / four_pi
                } else {
                    let r = pts[i] - pts[j];
                    -r.dot(&nx[i]) / (T::two_pi() * r.norm_squared())
                };
                k * jac[j] * h
            })
        }
        (None, Potential::DoubleLayer | Potential::ModifiedDoubleLayer | Potential::LogModifiedDoubleLayer) => {
            let n = source.len();
            let d = diff_matrix::<T>(n);
            let s0 = log_split(source, false);
            let mut t = &d * s0 * &d;
            for (i, &j) in source.jacobians().iter().enumerate() {
                let f = c / j;
                t.row_mut(i).scale_mut(f);
            }
            t
        }
        (Some(t), of) => {
            let normals = t.normals.ok_or(Error::MissingTargetNormals)?;
            match of {
                Potential::SingleLayer => {
                    separated(source, &t, |i, _, r| -r.dot(&normals[i]) / (T::two_pi() * r.norm_squared()))?
                }
                Potential::DoubleLayer | Potential::ModifiedDoubleLayer | Potential::LogModifiedDoubleLayer => {
                    hypersingular_separated(source, &t, normals, c)?
                }
            }
        }
    };
    let matrix = if of == Potential::LogModifiedDoubleLayer {
        let xs = target_points(source, &target);
        let nx = match target {
            Target::OnSource => source.outward_normals(),
            Target::Mesh(m) => m.outward_normals(),
            Target::Points { normals, .. } => normals.ok_or(Error::MissingTargetNormals)?,
        };
        let h = source.weight();
        let jac = source.jacobians();
        let mut m = matrix;
        for (i, x) in xs.iter().enumerate() {
            let r2 = x.coords.norm_squared();
            if r2 == T::zero() {
                return Err(Error::InvalidConfig("logarithmic modification evaluated at the origin".into()));
            }
            let g = -x.coords.dot(&nx[i]) / r2;
            for j in 0..m.ncols() {
                m[(i, j)] += c * g * jac[j] * h;
            }
        }
        m
    } else {
        matrix
    };
    Ok(LayerOperator { kind, matrix })
}

fn hypersingular_separated<T: Real>(
    source: &NystromMesh<T>,
    t: &Targets<'_, T>,
    normals: &[Vector2<T>],
    c: T,
) -> Result<DMatrix<T>> {
    let h = source.weight();
    let ys = source.points();
    let ny = source.outward_normals();
    let jac = source.jacobians();
    let two = lit::<T>(2.0);
    let mut m = DMatrix::zeros(t.points.len(), ys.len());
    for (i, x) in t.points.iter().enumerate() {
        let nx = normals[i];
        for (j, y) in ys.iter().enumerate() {
            let r = x - y;
            let r2 = r.norm_squared();
            if r2 == T::zero() {
                return Err(Error::UnsupportedSelfInteraction(
                    "hypersingular kernel at a source node; use Target::OnSource".into(),
                ));
            }
            let k = (nx.dot(&ny[j]) / r2 - two * r.dot(&ny[j]) * r.dot(&nx) / (r2 * r2)) / T::two_pi();
            m[(i, j)] = c * k * jac[j] * h;
        }
    }
    Ok(m)
}
