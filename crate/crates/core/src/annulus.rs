//! Closed-form solutions for the unit disk with a concentric circular
//! inclusion of radius `ρ`.
//!
//! All maps act mode-by-mode on [`FourierData`]. These series serve as the
//! analytic reference for the boundary-integral solvers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::FourierData;
use crate::scalar::{from_i64, from_usize, lit, periodic_nodes, to_f64, Complex, Real};

/// Default truncation: modes `0 ≤ |n| ≤ 19`.
pub const DEFAULT_ORDER: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnnulusBc<T> {
    /// `u₀ = 0` on the inclusion.
    Dirichlet,
    /// `(-∂_r + γ) u₀ = 0` at `r = ρ`; `γ = 0` is the insulated inclusion.
    Impedance { gamma: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusConfig<T> {
    rho: T,
    bc: AnnulusBc<T>,
    order: usize,
}

impl<T: Real> AnnulusConfig<T> {
    pub fn new(rho: T, bc: AnnulusBc<T>, order: usize) -> Result<Self> {
        if !(rho > T::zero() && rho < T::one()) {
            return Err(Error::InvalidConfig(format!("inner radius {} must lie in (0, 1)", to_f64(rho))));
        }
        if let AnnulusBc::Impedance { gamma } = bc {
            if !(gamma >= T::zero()) || !gamma.is_finite() {
                return Err(Error::InvalidConfig(format!("impedance {} must be finite and ≥ 0", to_f64(gamma))));
            }
        }
        Ok(Self { rho, bc, order })
    }

    pub fn dirichlet(rho: T) -> Result<Self> {
        Self::new(rho, AnnulusBc::Dirichlet, DEFAULT_ORDER)
    }

    pub fn impedance(rho: T, gamma: T) -> Result<Self> {
        Self::new(rho, AnnulusBc::Impedance { gamma }, DEFAULT_ORDER)
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn bc(&self) -> AnnulusBc<T> {
        self.bc
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn gamma(&self) -> Option<T> {
        match self.bc {
            AnnulusBc::Impedance { gamma } => Some(gamma),
            AnnulusBc::Dirichlet => None,
        }
    }

    /// `σ_n` of the impedance series. For `n = 0` this is
    /// `-γ / (ρ⁻¹ - γ ln ρ)`, which tends to `1/ln ρ` as `γ → ∞`.
    ///
    /// Returns `None` for a Dirichlet configuration.
    pub fn sigma_n(&self, n: i64) -> Option<T> {
        let gamma = self.gamma()?;
        let rho = self.rho;
        Some(if n == 0 {
            -gamma / (T::one() / rho - gamma * rho.ln())
        } else {
            let k = from_i64::<T>(n.abs());
            (k - rho * gamma) / (k + rho * gamma)
        })
    }

    /// The `n = 0` factor exactly as it is commonly printed,
    /// `-γ / (ln ρ - ρ⁻¹)`. Kept only to compare against [`sigma_n`](Self::sigma_n).
    pub fn sigma0_printed(&self) -> Option<T> {
        let gamma = self.gamma()?;
        Some(-gamma / (self.rho.ln() - T::one() / self.rho))
    }

    /// Multiplier of `Λ - Λ₀` on the mode `e^{inθ}` (not truncated).
    pub fn gap_coefficient(&self, n: i64) -> T {
        let rho = self.rho;
        let k = n.unsigned_abs() as i32;
        match self.bc {
            AnnulusBc::Dirichlet => {
                if n == 0 {
                    T::one() / rho.ln()
                } else {
                    let p = rho.powi(2 * k);
                    -lit::<T>(2.0) * from_usize::<T>(k as usize) * p / (T::one() - p)
                }
            }
            AnnulusBc::Impedance { .. } => {
                let sigma = self.sigma_n(n).unwrap();
                if n == 0 {
                    sigma
                } else {
                    let sp = sigma * rho.powi(2 * k);
                    lit::<T>(2.0) * from_usize::<T>(k as usize) * sp / (T::one() + sp)
                }
            }
        }
    }

    /// Multiplier of `Λ₀` on `e^{inθ}`.
    pub fn lambda0_coefficient(&self, n: i64) -> T {
        from_i64::<T>(n.abs()) - self.gap_coefficient(n)
    }

    /// `(Λ - Λ₀) f` truncated at `|n| ≤ order`, for either boundary condition.
    pub fn dtn_gap(&self, f: &FourierData<T>) -> FourierData<T> {
        let order = self.order;
        FourierData::from_fn(order, |n| f.get(n) * self.gap_coefficient(n))
    }

    /// `(Λ - Λ₀) f` for a perfectly conducting inclusion.
    pub fn dtn_gap_dirichlet(&self, f: &FourierData<T>) -> Result<FourierData<T>> {
        match self.bc {
            AnnulusBc::Dirichlet => Ok(self.dtn_gap(f)),
            _ => Err(Error::InvalidConfig("dtn_gap_dirichlet needs a Dirichlet configuration".into())),
        }
    }

    /// `(Λ - Λ₀) f` for a constant-impedance inclusion.
    pub fn dtn_gap_impedance(&self, f: &FourierData<T>) -> Result<FourierData<T>> {
        match self.bc {
            AnnulusBc::Impedance { .. } => Ok(self.dtn_gap(f)),
            _ => Err(Error::InvalidConfig("dtn_gap_impedance needs an impedance configuration".into())),
        }
    }

    /// `Λ₀ f` truncated at `|n| ≤ order`.
    pub fn dtn_inclusion(&self, f: &FourierData<T>) -> FourierData<T> {
        FourierData::from_fn(self.order, |n| f.get(n) * self.lambda0_coefficient(n))
    }

    /// `u₀(r, θ)` in the annulus `ρ ≤ r ≤ 1` with `u₀(1, ·) = f`.
    pub fn potential(&self, f: &FourierData<T>, r: T, theta: T) -> Result<T> {
        let rho = self.rho;
        let tol = lit::<T>(1e-12);
        if r < rho - tol || r > T::one() + tol {
            return Err(Error::OutOfDomain { r: to_f64(r), inner: to_f64(rho) });
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in f.modes() {
            let fnn = f.get(n);
            let radial = self.radial_factor(n, r);
            acc += fnn * radial * crate::scalar::cis(from_i64::<T>(n) * theta);
        }
        Ok(acc.re)
    }

    /// `u₀(r, θ)` for the Dirichlet inclusion.
    pub fn potential_dirichlet(&self, f: &FourierData<T>, r: T, theta: T) -> Result<T> {
        match self.bc {
            AnnulusBc::Dirichlet => self.potential(f, r, theta),
            _ => Err(Error::InvalidConfig("potential_dirichlet needs a Dirichlet configuration".into())),
        }
    }

    /// Radial profile `R_n(r)` with `R_n(1) = 1` so that `u₀ = Σ f_n R_n(r) e^{inθ}`.
    pub fn radial_factor(&self, n: i64, r: T) -> T {
        let rho = self.rho;
        let k = n.unsigned_abs() as i32;
        match self.bc {
            AnnulusBc::Dirichlet => {
                if n == 0 {
                    (rho / r).ln() / rho.ln()
                } else {
                    let p = rho.powi(2 * k);
                    (r.powi(k) - p / r.powi(k)) / (T::one() - p)
                }
            }
            AnnulusBc::Impedance { .. } => {
                let sigma = self.sigma_n(n).unwrap();
                if n == 0 {
                    T::one() - sigma * r.ln()
                } else {
                    let sp = sigma * rho.powi(2 * k);
                    (r.powi(k) + sp / r.powi(k)) / (T::one() + sp)
                }
            }
        }
    }

    /// Truncated kernel `K(θ, φ)` with `(Λ - Λ₀) f = ∫ K(θ, φ) f(φ) dφ`.
    pub fn gap_kernel(&self, theta: T, phi: T) -> T {
        let inv_two_pi = T::one() / T::two_pi();
        let mut acc = self.gap_coefficient(0) * inv_two_pi;
        for n in 1..=self.order as i64 {
            acc += lit::<T>(2.0) * inv_two_pi * self.gap_coefficient(n) * (from_i64::<T>(n) * (theta - phi)).cos();
        }
        acc
    }

    /// Collocation matrix `K(θ_i, θ_j)·2π/n` of the truncated gap operator.
    pub fn gap_collocation_matrix(&self, n: usize) -> DMatrix<T> {
        let thetas = periodic_nodes::<T>(n);
        let w = T::two_pi() / from_usize::<T>(n);
        DMatrix::from_fn(n, n, |i, j| self.gap_kernel(thetas[i], thetas[j]) * w)
    }

    /// Operator-norm distance, `H^{1/2} → H^{-1/2}`, between the truncations at
    /// `n1` and `n2`: `max_{n1 < |n| ≤ n2} |c_n| / (1 + n²)^{1/2}`.
    pub fn truncation_error(&self, n1: usize, n2: usize) -> T {
        ((n1 + 1)..=n2)
            .map(|n| {
                let weight = (T::one() + from_usize::<T>(n * n)).sqrt();
                self.gap_coefficient(n as i64).abs() / weight
            })
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// `u(r, θ) = Σ f_n r^{|n|} e^{inθ}` for the inclusion-free disk.
pub fn potential_healthy<T: Real>(f: &FourierData<T>, r: T, theta: T) -> T {
    f.modes()
        .map(|n| f.get(n) * r.powi(n.unsigned_abs() as i32) * crate::scalar::cis(from_i64::<T>(n) * theta))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        .re
}

/// `Λ f`: multiplies `f_n` by `|n|`.
pub fn dtn_healthy<T: Real>(f: &FourierData<T>) -> FourierData<T> {
    f.map_modes(|n, c| c * from_i64::<T>(n.abs()))
}
