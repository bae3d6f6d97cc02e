//! Matrix representations of `Λ`, `Λ₀` and the gap `Λ - Λ₀`.

use nalgebra::DMatrix;

use crate::bie::forward::ForwardOperator;
use crate::error::{Error, Result};
use crate::geometry::FourierData;
use crate::regularization::perturb_vector;
use crate::scalar::{cis, from_i64, from_usize, lit, periodic_nodes, Complex, Real};

/// Fourier modes spanned by a Fourier-basis operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSet {
    /// `-N..=N`.
    Symmetric(usize),
    /// `0..K`, with the equation imposed at `K` equispaced points: entry
    /// `(j, n)` is the image of `e^{inθ}` evaluated at `θ_j = 2πj/K`.
    OneSided(usize),
}

impl ModeSet {
    pub fn modes(&self) -> Vec<i64> {
        match *self {
            ModeSet::Symmetric(n) => (-(n as i64)..=n as i64).collect(),
            ModeSet::OneSided(k) => (0..k as i64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            ModeSet::Symmetric(n) => 2 * n + 1,
            ModeSet::OneSided(k) => k,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_mode(&self) -> usize {
        match *self {
            ModeSet::Symmetric(n) => n,
            ModeSet::OneSided(k) => k.saturating_sub(1),
        }
    }
}

/// Discretization of boundary functions on the outer curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Nodal values at `n` equispaced points.
    Collocation(usize),
    /// Trial functions `e^{inθ}`; symmetric sets are tested by Fourier
    /// coefficients, one-sided sets by point values.
    Fourier(ModeSet),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Collocation(n) => n,
            Basis::Fourier(m) => m.len(),
        }
    }
}

/// `Λ`, `Λ₀` and `Λ - Λ₀` in a common basis.
#[derive(Debug, Clone)]
pub struct DtnOperator<T: Real> {
    pub basis: Basis,
    pub healthy: DMatrix<Complex<T>>,
    pub lambda0: DMatrix<Complex<T>>,
    pub gap: DMatrix<Complex<T>>,
}

impl<T: Real> DtnOperator<T> {
    /// Wraps a gap matrix that came from elsewhere (file, oracle).
    pub fn from_gap(basis: Basis, gap: DMatrix<Complex<T>>) -> Result<Self> {
        let d = basis.dim();
        if gap.nrows() != d || gap.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "gap is {}x{}, basis has dimension {d}",
                gap.nrows(),
                gap.ncols()
            )));
        }
        let healthy = healthy_matrix::<T>(basis);
        let lambda0 = &healthy - &gap;
        Ok(Self { basis, healthy, lambda0, gap })
    }

    /// Dimension of the discretization.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Gap matrix in the orthonormal real trigonometric basis
    /// `1, cos θ, sin θ, cos 2θ, ...` (only for symmetric mode sets).
    pub fn gap_real_trig(&self) -> Result<DMatrix<Complex<T>>> {
        match self.basis {
            Basis::Fourier(ModeSet::Symmetric(n)) => Ok(to_real_trig(&self.gap, n)),
            _ => Err(Error::InvalidConfig("real trigonometric basis needs a symmetric mode set".into())),
        }
    }
}

/// `Λ` on the unit circle in the given basis.
pub fn healthy_matrix<T: Real>(basis: Basis) -> DMatrix<Complex<T>> {
    match basis {
        Basis::Fourier(ModeSet::OneSided(k)) => {
            let t = periodic_nodes::<T>(k);
            DMatrix::from_fn(k, k, |j, n| cis(from_usize::<T>(n) * t[j]) * from_usize::<T>(n))
        }
        Basis::Fourier(m) => {
            let modes = m.modes();
            DMatrix::from_fn(modes.len(), modes.len(), |i, j| {
                if i == j {
                    Complex::new(from_i64::<T>(modes[i].abs()), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
        }
        Basis::Collocation(n) => {
            // Λ applied to the trigonometric interpolant of the j-th nodal indicator.
            let half = n / 2;
            let t = periodic_nodes::<T>(n);
            let inv = T::one() / from_usize::<T>(n);
            DMatrix::from_fn(n, n, |i, j| {
                let d = t[i] - t[j];
                let mut acc = T::zero();
                for k in 1..half {
                    let kf = from_usize::<T>(k);
                    acc += lit::<T>(2.0) * kf * (kf * d).cos();
                }
                // the Nyquist mode of an even grid has zero derivative, as in the
                // spectral differentiation used for Λ₀
                if n % 2 == 1 {
                    let kf = from_usize::<T>(half);
                    acc += lit::<T>(2.0) * kf * (kf * d).cos();
                }
                Complex::new(acc * inv, T::zero())
            })
        }
    }
}

/// Multiplicative noise on simulated flux measurements: every column of flux
/// data is perturbed by [`perturb_vector`] with seed `seed + column`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxNoise<T> {
    pub delta: T,
    pub seed: u64,
}

/// Assembles `Λ₀` by solving the forward problem for every basis element with
/// one factorization, and pairs it with `Λ` on the unit circle.
pub fn dtn_matrix<T: Real>(op: &ForwardOperator<T>, basis: Basis) -> Result<DtnOperator<T>> {
    dtn_matrix_with_noise(op, basis, None)
}

fn noisy<T: Real>(mut flux: DMatrix<T>, noise: Option<FluxNoise<T>>) -> DMatrix<T> {
    if let Some(FluxNoise { delta, seed }) = noise {
        for c in 0..flux.ncols() {
            let col: Vec<T> = flux.column(c).iter().copied().collect();
            let p = perturb_vector(&col, delta, seed.wrapping_add(c as u64));
            flux.column_mut(c).copy_from_slice(&p);
        }
    }
    flux
}

/// [`dtn_matrix`] with optional noise on the simulated flux.
pub fn dtn_matrix_with_noise<T: Real>(
    op: &ForwardOperator<T>,
    basis: Basis,
    noise: Option<FluxNoise<T>>,
) -> Result<DtnOperator<T>> {
    let outer = op.outer();
    if !outer.curve().is_unit_circle() {
        return Err(Error::UnsupportedOuterBoundary);
    }
    let nm = outer.len();
    let lambda0 = match basis {
        Basis::Collocation(n) => {
            if n != nm {
                return Err(Error::DimensionMismatch(format!(
                    "collocation with {n} points needs an outer mesh with {n} nodes, got {nm}"
                )));
            }
            noisy(op.flux_many(&DMatrix::identity(nm, nm))?, noise).map(|v| Complex::new(v, T::zero()))
        }
        Basis::Fourier(set) => {
            let modes = set.modes();
            let top = set.max_mode();
            if nm < 2 * top + 1 {
                return Err(Error::InsufficientSamples { required: 2 * top + 1, got: nm });
            }
            let t = outer.thetas();
            // real and imaginary parts of e^{inθ} as separate real data
            let data = DMatrix::from_fn(nm, 2 * modes.len(), |i, c| {
                let z = cis(from_i64::<T>(modes[c / 2]) * t[i]);
                if c % 2 == 0 {
                    z.re
                } else {
                    z.im
                }
            });
            let flux = noisy(op.flux_many(&data)?, noise);
            let column = |l: usize| -> Vec<Complex<T>> {
                (0..nm).map(|i| Complex::new(flux[(i, 2 * l)], flux[(i, 2 * l + 1)])).collect()
            };
            match set {
                ModeSet::Symmetric(_) => {
                    let inv = T::one() / from_usize::<T>(nm);
                    let cols: Vec<_> = (0..modes.len()).map(column).collect();
                    DMatrix::from_fn(modes.len(), modes.len(), |k, l| {
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for (i, g) in cols[l].iter().enumerate() {
                            acc += *g * cis(-from_i64::<T>(modes[k]) * t[i]);
                        }
                        acc * inv
                    })
                }
                ModeSet::OneSided(k) => {
                    // trigonometric interpolation of the nodal flux onto the K points
                    let pts = periodic_nodes::<T>(k);
                    let order = (nm - 1) / 2;
                    let mut m = DMatrix::from_element(k, k, Complex::new(T::zero(), T::zero()));
                    for l in 0..k {
                        let coeffs = FourierData::analyze(&column(l), order)?;
                        for (j, &p) in pts.iter().enumerate() {
                            m[(j, l)] = coeffs.eval(p);
                        }
                    }
                    m
                }
            }
        }
    };
    let healthy = healthy_matrix::<T>(basis);
    let gap = &healthy - &lambda0;
    Ok(DtnOperator { basis, healthy, lambda0, gap })
}

/// Change of basis from `e^{inθ}`, `|n| ≤ order`, to the orthonormal real
/// trigonometric system `1, cos θ, sin θ, ..., cos Nθ, sin Nθ` (up to `√(2π)`).
pub fn to_real_trig<T: Real>(a: &DMatrix<Complex<T>>, order: usize) -> DMatrix<Complex<T>> {
    let dim = 2 * order + 1;
    assert_eq!(a.nrows(), dim);
    let idx = |n: i64| (n + order as i64) as usize;
    let s = T::one() / lit::<T>(2.0).sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    let mut u = DMatrix::from_element(dim, dim, zero);
    u[(idx(0), 0)] = Complex::new(T::one(), T::zero());
    for n in 1..=order as i64 {
        let c = 2 * n as usize - 1;
        // cos nθ = (e^{inθ} + e^{-inθ})/2, sin nθ = (e^{inθ} - e^{-inθ})/(2i)
        u[(idx(n), c)] = Complex::new(s, T::zero());
        u[(idx(-n), c)] = Complex::new(s, T::zero());
        u[(idx(n), c + 1)] = Complex::new(T::zero(), -s);
        u[(idx(-n), c + 1)] = Complex::new(T::zero(), s);
    }
    u.adjoint() * a * u
}
