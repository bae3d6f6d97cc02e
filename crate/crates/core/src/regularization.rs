//! SVD-based regularized solves and the multiplicative noise models.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Complex, Real};

/// Default Morozov safety factor.
pub const DEFAULT_SAFETY: f64 = 1.5;

/// `A = U Σ Vᴴ` with singular values sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    u: DMatrix<Complex<T>>,
    sigma: Vec<T>,
    v: DMatrix<Complex<T>>,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &DMatrix<Complex<T>>) -> Self {
        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested Vᴴ").adjoint();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
        let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
        let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
        let v = DMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
        Self { u, sigma, v }
    }

    pub fn from_real(a: &DMatrix<T>) -> Self {
        Self::new(&a.map(|x| Complex::new(x, T::zero())))
    }

    pub fn singular_values(&self) -> &[T] {
        &self.sigma
    }

    pub fn u(&self) -> &DMatrix<Complex<T>> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<Complex<T>> {
        &self.v
    }

    pub fn reconstruct(&self) -> DMatrix<Complex<T>> {
        let s = DMatrix::from_diagonal(&DVector::from_iterator(
            self.sigma.len(),
            self.sigma.iter().map(|&s| Complex::new(s, T::zero())),
        ));
        &self.u * s * self.v.adjoint()
    }

    /// `u_iᴴ b` for every singular triple.
    pub fn coefficients(&self, b: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        self.u.adjoint() * b
    }

    fn expand(&self, weights: impl Fn(usize, T) -> T, c: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut x = DVector::from_element(self.v.nrows(), Complex::new(T::zero(), T::zero()));
        for (i, &s) in self.sigma.iter().enumerate() {
            let w = weights(i, s);
            if w != T::zero() {
                x += self.v.column(i) * (c[i] * w);
            }
        }
        x
    }

    /// Part of `b` outside the span of the left singular vectors.
    fn orthogonal_residual_sq(&self, b: &DVector<Complex<T>>, c: &DVector<Complex<T>>) -> T {
        let proj = &self.u * c;
        (b - proj).norm_squared()
    }
}

/// `x = Σ σ_i/(α + σ_i²) (u_iᴴ b) v_i`, the minimizer of `‖Ax - b‖² + α‖x‖²`.
pub fn tikhonov_solve<T: Real>(svd: &Svd<T>, b: &DVector<Complex<T>>, alpha: T) -> Result<DVector<Complex<T>>> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidConfig(format!("Tikhonov parameter must be positive, got {}", to_f64(alpha))));
    }
    let c = svd.coefficients(b);
    Ok(svd.expand(|_, s| s / (alpha + s * s), &c))
}

/// `‖A x_α - b‖` for the Tikhonov solution, from the SVD.
pub fn residual_norm<T: Real>(svd: &Svd<T>, b: &DVector<Complex<T>>, alpha: T) -> T {
    let c = svd.coefficients(b);
    residual_from_coefficients(svd, &c, svd.orthogonal_residual_sq(b, &c), alpha)
}

fn residual_from_coefficients<T: Real>(svd: &Svd<T>, c: &DVector<Complex<T>>, perp_sq: T, alpha: T) -> T {
    let mut r = perp_sq;
    for (i, &s) in svd.sigma.iter().enumerate() {
        let f = alpha / (alpha + s * s);
        r += f * f * c[i].norm_sqr();
    }
    r.sqrt()
}

/// Morozov's discrepancy principle: `α` with `‖A x_α - b‖ = c·δ_abs`.
///
/// The residual grows monotonically with `α`, so the root is found by bisection
/// in `log α`, starting from `[1e-14 σ₁², σ₁²]` and widening upward if needed.
/// When the target is below the attainable floor the lower end is returned.
pub fn discrepancy_alpha<T: Real>(svd: &Svd<T>, b: &DVector<Complex<T>>, delta_abs: T, safety: T) -> Result<T> {
    let bnorm = b.norm();
    let target = safety * delta_abs;
    if delta_abs >= bnorm || target >= bnorm {
        return Err(Error::NoiseDominates { noise: to_f64(target), data: to_f64(bnorm) });
    }
    let s1 = svd.sigma.first().copied().unwrap_or_else(T::zero);
    if s1 == T::zero() {
        return Err(Error::AllModesCut);
    }
    let c = svd.coefficients(b);
    let perp = svd.orthogonal_residual_sq(b, &c);
    let res = |log_a: f64| to_f64(residual_from_coefficients(svd, &c, perp, lit::<T>(log_a.exp()))) - to_f64(target);

    let s1sq = to_f64(s1 * s1);
    let mut lo = (1e-14 * s1sq).ln();
    let mut hi = s1sq.ln();
    if res(lo) >= 0.0 {
        return Ok(lit(lo.exp()));
    }
    let mut widen = 0;
    while res(hi) < 0.0 {
        hi += 10f64.ln();
        widen += 1;
        if widen > 60 {
            return Err(Error::NoiseDominates { noise: to_f64(target), data: to_f64(bnorm) });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if res(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(lit((0.5 * (lo + hi)).exp()))
}

/// Truncated pseudoinverse keeping `σ_i ≥ τ σ₁`.
pub fn cutoff_solve<T: Real>(svd: &Svd<T>, b: &DVector<Complex<T>>, tau_rel: T) -> Result<DVector<Complex<T>>> {
    if !(tau_rel > T::zero() && tau_rel <= T::one()) {
        return Err(Error::InvalidConfig(format!("cut-off must lie in (0, 1], got {}", to_f64(tau_rel))));
    }
    let s1 = svd.sigma.first().copied().unwrap_or_else(T::zero);
    let thresh = tau_rel * s1;
    if s1 == T::zero() {
        return Err(Error::AllModesCut);
    }
    let c = svd.coefficients(b);
    Ok(svd.expand(|_, s| if s >= thresh && s > T::zero() { T::one() / s } else { T::zero() }, &c))
}

/// Magnitude of the noise assumed by the discrepancy principle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel<T> {
    /// `δ_abs = δ‖b‖`.
    Relative(T),
    Absolute(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice<T> {
    Explicit(T),
    Discrepancy { level: NoiseLevel<T>, safety: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegStrategy<T> {
    Tikhonov(AlphaChoice<T>),
    /// Relative spectral cut-off `τ`.
    Cutoff(T),
    /// Pseudoinverse at machine-precision rank.
    None,
}

/// Regularized solution with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct RegSolution<T: Real> {
    pub x: DVector<Complex<T>>,
    /// Tikhonov parameter actually used.
    pub alpha: Option<T>,
    /// Number of singular triples retained (cut-off and pseudoinverse).
    pub kept: Option<usize>,
    /// The discrepancy target was unattainable and `α = σ₁²` was used.
    pub fallback: bool,
}

impl<T: Real> RegStrategy<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegStrategy::Tikhonov(AlphaChoice::Explicit(a)) if !(a > T::zero()) => {
                Err(Error::InvalidConfig("Tikhonov α must be positive".into()))
            }
            RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level, safety }) => {
                let d = match level {
                    NoiseLevel::Relative(d) | NoiseLevel::Absolute(d) => d,
                };
                if d < T::zero() || safety < T::one() {
                    return Err(Error::InvalidConfig("need δ ≥ 0 and safety factor ≥ 1".into()));
                }
                Ok(())
            }
            RegStrategy::Cutoff(t) if !(t > T::zero() && t < T::one()) => {
                Err(Error::InvalidConfig("cut-off τ must lie in (0, 1)".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn solve(&self, svd: &Svd<T>, b: &DVector<Complex<T>>) -> Result<RegSolution<T>> {
        self.validate()?;
        match *self {
            RegStrategy::Tikhonov(AlphaChoice::Explicit(alpha)) => {
                Ok(RegSolution { x: tikhonov_solve(svd, b, alpha)?, alpha: Some(alpha), kept: None, fallback: false })
            }
            RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level, safety }) => {
                let delta_abs = match level {
                    NoiseLevel::Relative(d) => d * b.norm(),
                    NoiseLevel::Absolute(d) => d,
                };
                let (alpha, fallback) = match discrepancy_alpha(svd, b, delta_abs, safety) {
                    Ok(a) => (a, false),
                    Err(Error::NoiseDominates { .. }) => {
                        let s1 = svd.sigma.first().copied().unwrap_or_else(T::one);
                        log::warn!("noise dominates the data; falling back to α = σ₁²");
                        (s1 * s1, true)
                    }
                    Err(e) => return Err(e),
                };
                Ok(RegSolution { x: tikhonov_solve(svd, b, alpha)?, alpha: Some(alpha), kept: None, fallback })
            }
            RegStrategy::Cutoff(tau) => {
                let kept = count_above(svd, tau);
                Ok(RegSolution { x: cutoff_solve(svd, b, tau)?, alpha: None, kept: Some(kept), fallback: false })
            }
            RegStrategy::None => {
                let n = from_usize::<T>(svd.sigma.len().max(1));
                let tau = T::default_epsilon() * n;
                let kept = count_above(svd, tau);
                Ok(RegSolution { x: cutoff_solve(svd, b, tau)?, alpha: None, kept: Some(kept), fallback: false })
            }
        }
    }
}

fn count_above<T: Real>(svd: &Svd<T>, tau: T) -> usize {
    let s1 = svd.sigma.first().copied().unwrap_or_else(T::zero);
    svd.sigma.iter().filter(|&&s| s >= tau * s1 && s > T::zero()).count()
}

/// Matrix norm used to normalize the noise matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseNorm {
    /// Largest singular value.
    #[default]
    Spectral,
    Frobenius,
}

/// Uniform `[-1, 1]` entries, shifted to zero mean and scaled to unit norm.
pub fn noise_matrix<T: Real>(rows: usize, cols: usize, seed: u64, norm: NoiseNorm) -> DMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mean = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
    let e = DMatrix::from_iterator(rows, cols, raw.into_iter().map(|v| v - mean));
    let n = match norm {
        NoiseNorm::Spectral => e.clone().singular_values().max(),
        NoiseNorm::Frobenius => e.norm(),
    };
    let e = if n > 0.0 { e / n } else { e };
    e.map(lit::<T>)
}

/// `A_ij (1 + δ E_ij)` with `E` from [`noise_matrix`].
pub fn perturb_matrix<T: Real>(
    a: &DMatrix<Complex<T>>,
    delta: T,
    seed: u64,
    norm: NoiseNorm,
) -> DMatrix<Complex<T>> {
    if delta == T::zero() {
        return a.clone();
    }
    let e = noise_matrix::<T>(a.nrows(), a.ncols(), seed, norm);
    a.zip_map(&e, |x, n| x * (T::one() + delta * n))
}

/// `g_j (1 + δ e_j)` with `e_j` uniform on `[-1, 1]`, recentred to zero mean.
pub fn perturb_vector<T: Real>(g: &[T], delta: T, seed: u64) -> Vec<T> {
    if delta == T::zero() {
        return g.to_vec();
    }
    let e = uniform_recentred(g.len(), seed);
    g.iter().zip(e).map(|(&x, n)| x * (T::one() + delta * lit::<T>(n))).collect()
}

/// The recentred draws used by [`perturb_vector`].
pub fn uniform_recentred(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mean = raw.iter().sum::<f64>() / len.max(1) as f64;
    raw.into_iter().map(|v| v - mean).collect()
}
