//! Forward problem in the region between the outer curve and the inclusion.
//!
//! The solution is sought as `u₀ = D_m φ + S_i ψ` with the doubled double layer
//! on the outer curve and a single layer on the inclusion boundary.

use nalgebra::{DMatrix, DVector, Point2, LU};

use crate::bie::layer::{
    assemble_double_layer, assemble_normal_derivative, assemble_single_layer, Potential, Target,
};
use crate::bie::mesh::NystromMesh;
use crate::error::{Error, Result};
use crate::geometry::BoundaryRole;
use crate::scalar::{lit, to_f64, Real};

/// Condition numbers above this are reported as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Boundary condition on the inclusion.
#[derive(Debug, Clone, PartialEq)]
pub enum InclusionBc<T> {
    /// `u₀ = 0`.
    Dirichlet,
    /// `∂_ν u₀ + γ u₀ = 0`, with `γ` sampled at the inclusion nodes and `ν`
    /// pointing into the inclusion.
    Impedance(Vec<T>),
}

impl<T: Real> InclusionBc<T> {
    pub fn constant_impedance(mesh: &NystromMesh<T>, gamma: T) -> Self {
        Self::Impedance(vec![gamma; mesh.len()])
    }

    pub fn impedance_fn(mesh: &NystromMesh<T>, gamma: impl Fn(T) -> T) -> Self {
        Self::Impedance(mesh.thetas().iter().map(|&t| gamma(t)).collect())
    }
}

/// Factorized forward system, reusable across boundary data.
#[derive(Debug, Clone)]
pub struct ForwardOperator<T: Real> {
    outer: NystromMesh<T>,
    inner: NystromMesh<T>,
    bc: InclusionBc<T>,
    lu: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    flux_phi: DMatrix<T>,
    flux_psi: DMatrix<T>,
    condition: f64,
}

/// Densities and outer flux for one Dirichlet datum.
#[derive(Debug, Clone)]
pub struct ForwardSolution<T: Real> {
    outer: NystromMesh<T>,
    inner: NystromMesh<T>,
    pub phi: Vec<T>,
    pub psi: Vec<T>,
    /// `∂_ν u₀` at the outer nodes (`Λ₀ f`).
    pub flux: Vec<T>,
}

impl<T: Real> ForwardOperator<T> {
    pub fn new(outer: NystromMesh<T>, inner: NystromMesh<T>, bc: InclusionBc<T>) -> Result<Self> {
        if outer.role() != BoundaryRole::Outer || inner.role() != BoundaryRole::Inner {
            return Err(Error::InvalidConfig("meshes must have outer and inner roles".into()));
        }
        let (nm, ni) = (outer.len(), inner.len());
        if let InclusionBc::Impedance(g) = &bc {
            if g.len() != ni {
                return Err(Error::DimensionMismatch(format!("γ has {} values for {ni} nodes", g.len())));
            }
            if g.iter().any(|&v| v < T::zero() || !v.is_finite()) {
                return Err(Error::InvalidConfig("impedance must be finite and non-negative".into()));
            }
        }
        check_disjoint(&outer, &inner)?;

        let k_mm = assemble_double_layer(&outer, Target::OnSource, true)?.into_matrix();
        let s_im = assemble_single_layer(&inner, Target::Mesh(&outer))?.into_matrix();
        let k_mi = assemble_double_layer(&outer, Target::Mesh(&inner), true)?.into_matrix();
        let s_ii = assemble_single_layer(&inner, Target::OnSource)?.into_matrix();

        let mut a = DMatrix::zeros(nm + ni, nm + ni);
        a.view_mut((0, 0), (nm, nm)).copy_from(&(k_mm - DMatrix::identity(nm, nm)));
        a.view_mut((0, nm), (nm, ni)).copy_from(&s_im);
        match &bc {
            InclusionBc::Dirichlet => {
                a.view_mut((nm, 0), (ni, nm)).copy_from(&k_mi);
                a.view_mut((nm, nm), (ni, ni)).copy_from(&s_ii);
            }
            InclusionBc::Impedance(gamma) => {
                // ∂_ν = -∂_n on the inclusion; the exterior trace of ∂_n S is K' - 1/2.
                let n_mi = assemble_normal_derivative(&outer, Target::Mesh(&inner), Potential::DoubleLayer, true)?
                    .into_matrix();
                let kp_ii =
                    assemble_normal_derivative(&inner, Target::OnSource, Potential::SingleLayer, false)?.into_matrix();
                let half = lit::<T>(0.5);
                let g = DMatrix::from_diagonal(&DVector::from_column_slice(gamma));
                let row_phi = &g * &k_mi - n_mi;
                let row_psi = &g * &s_ii - kp_ii + DMatrix::identity(ni, ni) * half;
                a.view_mut((nm, 0), (ni, nm)).copy_from(&row_phi);
                a.view_mut((nm, nm), (ni, ni)).copy_from(&row_psi);
            }
        }

        let condition = condition_number(&a);
        log::debug!("forward system {}x{}: condition ≈ {condition:.3e}", nm + ni, nm + ni);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::SingularSystem { condition });
        }

        let flux_phi = assemble_normal_derivative(&outer, Target::OnSource, Potential::DoubleLayer, true)?.into_matrix();
        let flux_psi =
            assemble_normal_derivative(&inner, Target::Mesh(&outer), Potential::SingleLayer, false)?.into_matrix();
        Ok(Self { outer, inner, bc, lu: a.lu(), flux_phi, flux_psi, condition })
    }

    pub fn outer(&self) -> &NystromMesh<T> {
        &self.outer
    }

    pub fn inner(&self) -> &NystromMesh<T> {
        &self.inner
    }

    pub fn bc(&self) -> &InclusionBc<T> {
        &self.bc
    }

    /// 2-norm condition number of the assembled system.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Solves for several data at once; columns of `f` are values at the outer
    /// nodes. Returns the densities `[φ; ψ]` column-wise.
    pub fn densities(&self, f: &DMatrix<T>) -> Result<DMatrix<T>> {
        let (nm, ni) = (self.outer.len(), self.inner.len());
        if f.nrows() != nm {
            return Err(Error::DimensionMismatch(format!("data has {} rows, outer mesh {nm} nodes", f.nrows())));
        }
        let mut rhs = DMatrix::zeros(nm + ni, f.ncols());
        rhs.view_mut((0, 0), (nm, f.ncols())).copy_from(f);
        self.lu.solve(&rhs).ok_or(Error::SingularSystem { condition: f64::INFINITY })
    }

    /// `Λ₀` applied to each column of `f`.
    pub fn flux_many(&self, f: &DMatrix<T>) -> Result<DMatrix<T>> {
        let nm = self.outer.len();
        let ni = self.inner.len();
        let x = self.densities(f)?;
        Ok(&self.flux_phi * x.rows(0, nm) + &self.flux_psi * x.rows(nm, ni))
    }

    pub fn solve(&self, f: &[T]) -> Result<ForwardSolution<T>> {
        let nm = self.outer.len();
        let x = self.densities(&DMatrix::from_column_slice(f.len(), 1, f))?;
        let phi = DVector::from_iterator(nm, x.rows(0, nm).iter().copied());
        let psi = DVector::from_iterator(self.inner.len(), x.rows(nm, self.inner.len()).iter().copied());
        let flux = &self.flux_phi * &phi + &self.flux_psi * &psi;
        Ok(ForwardSolution {
            outer: self.outer.clone(),
            inner: self.inner.clone(),
            phi: phi.iter().copied().collect(),
            psi: psi.iter().copied().collect(),
            flux: flux.iter().copied().collect(),
        })
    }
}

impl<T: Real> ForwardSolution<T> {
    /// `u₀` at points strictly between the two curves.
    pub fn potential(&self, points: &[Point2<T>]) -> Result<Vec<T>> {
        let target = Target::Points { points, normals: None };
        let d = assemble_double_layer(&self.outer, target, true)?;
        let s = assemble_single_layer(&self.inner, target)?;
        Ok(d.apply(&self.phi).into_iter().zip(s.apply(&self.psi)).map(|(a, b)| a + b).collect())
    }

    /// Trace of `u₀` on the inclusion boundary.
    pub fn inner_trace(&self) -> Result<Vec<T>> {
        let k = assemble_double_layer(&self.outer, Target::Mesh(&self.inner), true)?;
        let s = assemble_single_layer(&self.inner, Target::OnSource)?;
        Ok(k.apply(&self.phi).into_iter().zip(s.apply(&self.psi)).map(|(a, b)| a + b).collect())
    }
}

/// Builds the operator and solves for one datum `f` given at the outer nodes.
pub fn solve_forward<T: Real>(
    outer: NystromMesh<T>,
    inner: NystromMesh<T>,
    bc: InclusionBc<T>,
    f: &[T],
) -> Result<ForwardSolution<T>> {
    ForwardOperator::new(outer, inner, bc)?.solve(f)
}

fn check_disjoint<T: Real>(outer: &NystromMesh<T>, inner: &NystromMesh<T>) -> Result<()> {
    let pts_o = outer.points();
    // every inner node must lie strictly inside the outer polygon
    for p in inner.points() {
        if !point_in_polygon(p, pts_o) {
            return Err(Error::InvalidCurve("inclusion is not inside the outer boundary".into()));
        }
    }
    if outer.distance_to(inner) == T::zero() {
        return Err(Error::InvalidCurve("curves touch".into()));
    }
    Ok(())
}

pub(crate) fn point_in_polygon<T: Real>(p: &Point2<T>, poly: &[Point2<T>]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub(crate) fn condition_number<T: Real>(a: &DMatrix<T>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().fold(T::zero(), |m, &s| m.max(s));
    let min = sv.iter().fold(T::max_value().unwrap(), |m, &s| m.min(s));
    if min == T::zero() {
        f64::INFINITY
    } else {
        to_f64(max / min)
    }
}
