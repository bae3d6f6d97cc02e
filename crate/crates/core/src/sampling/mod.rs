//! Sampling-method inversion: the current-gap equation `(Λ - Λ₀) f_z = φ_z`,
//! the indicator `W(z)`, level sets and curve fitting.

mod contour;
mod fit;
mod grid;

pub use contour::{extract_level_set, marching_squares, DEFAULT_THRESHOLD};
pub use fit::{fit_lambda_from_noise, fit_trig_curve, fit_trig_curve_at, FittedCurve};
pub use grid::{scan, GridSpec, IndicatorGrid, MatrixNoise, DEFAULT_MASK_RADIUS};

use nalgebra::{DMatrix, DVector, Point2};

use crate::bie::{Basis, DtnOperator, ModeSet};
use crate::error::{Error, Result};
use crate::geometry::{FourierData, HalfSign};
use crate::regularization::{RegStrategy, Svd};
use crate::scalar::{cis, from_i64, from_usize, lit, periodic_nodes, to_f64, Complex, Real};

/// `φ_z` is only formed for `|z| < 1 - POISSON_MARGIN`.
pub const POISSON_MARGIN: f64 = 0.01;

/// `φ_z(θ) = (1/2π)(1 - |z|²)/(|z|² + 1 - 2|z| cos(θ - θ_z))`.
pub fn poisson_kernel<T: Real>(z: &Point2<T>, theta: T) -> T {
    let r2 = z.coords.norm_squared();
    let r = r2.sqrt();
    let tz = z.y.atan2(z.x);
    (T::one() - r2) / (T::two_pi() * (r2 + T::one() - lit::<T>(2.0) * r * (theta - tz).cos()))
}

/// `φ_z` in the given basis: node values for collocation and one-sided
/// Fourier sets, coefficients `(1/2π)|z|^{|n|} e^{-inθ_z}` for symmetric ones.
pub fn poisson_rhs<T: Real>(z: &Point2<T>, basis: Basis) -> Result<DVector<Complex<T>>> {
    let r = z.coords.norm();
    if !(r < T::one() - lit::<T>(POISSON_MARGIN)) {
        return Err(Error::TooCloseToBoundary { x: to_f64(z.x), y: to_f64(z.y) });
    }
    let nodal = |n: usize| {
        DVector::from_iterator(
            n,
            periodic_nodes::<T>(n).into_iter().map(|t| Complex::new(poisson_kernel(z, t), T::zero())),
        )
    };
    Ok(match basis {
        Basis::Collocation(n) => nodal(n),
        Basis::Fourier(ModeSet::OneSided(k)) => nodal(k),
        Basis::Fourier(set @ ModeSet::Symmetric(_)) => {
            let tz = z.y.atan2(z.x);
            let modes = set.modes();
            DVector::from_iterator(
                modes.len(),
                modes.iter().map(|&n| cis(-from_i64::<T>(n) * tz) * (r.powi(n.abs() as i32) / T::two_pi())),
            )
        }
    })
}

/// Norm whose inverse is the indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndicatorNorm {
    #[default]
    L2,
    /// `(Σ (1 + n²)^{1/2} |f_n|²)^{1/2}` of the Fourier coefficients of `f_z`.
    SobolevHalf,
}

/// Regularized solution of the gap equation at one sampling point.
#[derive(Debug, Clone)]
pub struct GapSolution<T: Real> {
    pub f: DVector<Complex<T>>,
    pub alpha: Option<T>,
    /// Singular triples retained by a cut-off.
    pub rank: Option<usize>,
    pub residual: T,
    pub fallback: bool,
}

/// A gap matrix decomposed once and reused for every sampling point.
#[derive(Debug, Clone)]
pub struct GapSolver<T: Real> {
    basis: Basis,
    gap: DMatrix<Complex<T>>,
    svd: Svd<T>,
    reg: RegStrategy<T>,
}

impl<T: Real> GapSolver<T> {
    pub fn new(dtn: &DtnOperator<T>, reg: RegStrategy<T>) -> Result<Self> {
        Self::from_matrix(dtn.basis, dtn.gap.clone(), reg)
    }

    pub fn from_matrix(basis: Basis, gap: DMatrix<Complex<T>>, reg: RegStrategy<T>) -> Result<Self> {
        reg.validate()?;
        if gap.nrows() != basis.dim() || gap.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "gap is {}x{}, basis has dimension {}",
                gap.nrows(),
                gap.ncols(),
                basis.dim()
            )));
        }
        let svd = Svd::new(&gap);
        Ok(Self { basis, gap, svd, reg })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn svd(&self) -> &Svd<T> {
        &self.svd
    }

    pub fn solve_rhs(&self, b: &DVector<Complex<T>>) -> Result<GapSolution<T>> {
        if matches!(self.reg, RegStrategy::None) {
            let s = self.svd.singular_values();
            let (s1, sn) = (s[0], s[s.len() - 1]);
            let limit = T::default_epsilon() * from_usize::<T>(s.len());
            if !(sn > limit * s1) {
                let condition = if sn > T::zero() { to_f64(s1 / sn) } else { f64::INFINITY };
                return Err(Error::SingularSystem { condition });
            }
        }
        let sol = self.reg.solve(&self.svd, b)?;
        let residual = (&self.gap * &sol.x - b).norm();
        Ok(GapSolution { f: sol.x, alpha: sol.alpha, rank: sol.kept, residual, fallback: sol.fallback })
    }

    pub fn solve(&self, z: &Point2<T>) -> Result<GapSolution<T>> {
        self.solve_rhs(&poisson_rhs(z, self.basis)?)
    }

    /// `W(z)`, the reciprocal norm of the regularized `f_z`.
    pub fn indicator(&self, z: &Point2<T>, norm: IndicatorNorm) -> Result<T> {
        let sol = self.solve(z)?;
        Ok(T::one() / solution_norm(&sol.f, self.basis, norm)?)
    }
}

/// Norm of a density given in `basis`.
pub fn solution_norm<T: Real>(f: &DVector<Complex<T>>, basis: Basis, norm: IndicatorNorm) -> Result<T> {
    match norm {
        IndicatorNorm::L2 => Ok(f.norm()),
        IndicatorNorm::SobolevHalf => {
            let weighted = |modes: &[i64]| {
                modes
                    .iter()
                    .zip(f.iter())
                    .map(|(&n, c)| (T::one() + from_i64::<T>(n * n)).sqrt() * c.norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            };
            match basis {
                Basis::Fourier(set) => Ok(weighted(&set.modes())),
                Basis::Collocation(n) => {
                    let values: Vec<Complex<T>> = f.iter().copied().collect();
                    let coeffs = FourierData::analyze(&values, (n - 1) / 2)?;
                    Ok(coeffs.sobolev_half_norm(HalfSign::Plus))
                }
            }
        }
    }
}

/// Solves the gap equation at `z` with a fresh decomposition.
pub fn solve_current_gap<T: Real>(dtn: &DtnOperator<T>, z: &Point2<T>, reg: RegStrategy<T>) -> Result<GapSolution<T>> {
    GapSolver::new(dtn, reg)?.solve(z)
}

/// `W(z)` with a fresh decomposition.
pub fn indicator<T: Real>(dtn: &DtnOperator<T>, z: &Point2<T>, reg: RegStrategy<T>, norm: IndicatorNorm) -> Result<T> {
    GapSolver::new(dtn, reg)?.indicator(z, norm)
}
