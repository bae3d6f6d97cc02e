//! Symmetric-index Fourier coefficients of 2π-periodic functions.

use crate::error::{Error, Result};
use crate::scalar::{cis, from_i64, from_usize, lit, periodic_nodes, Complex, Real};

/// Coefficients `f_n`, `n = -N..=N`, of `Σ f_n e^{inθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierData<T> {
    order: usize,
    coeffs: Vec<Complex<T>>,
}

/// Which Sobolev-type weight `(1 + n²)^{±1/2}` to apply in [`FourierData::sobolev_half_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSign {
    Plus,
    Minus,
}

impl<T: Real> FourierData<T> {
    pub fn zeros(order: usize) -> Self {
        Self { order, coeffs: vec![Complex::new(T::zero(), T::zero()); 2 * order + 1] }
    }

    /// Builds from `2N + 1` coefficients ordered `-N..=N`.
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "expected an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { order: coeffs.len() / 2, coeffs })
    }

    /// Single mode `e^{inθ}` in a representation of order `max(|n|, order)`.
    pub fn mode(n: i64, order: usize) -> Self {
        let mut d = Self::zeros(order.max(n.unsigned_abs() as usize));
        d.set(n, Complex::new(T::one(), T::zero()));
        d
    }

    /// Builds from a function of the mode index.
    pub fn from_fn(order: usize, f: impl Fn(i64) -> Complex<T>) -> Self {
        let n = order as i64;
        Self { order, coeffs: (-n..=n).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Mode indices in storage order.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.order as i64;
        -n..=n
    }

    /// `f_n`, zero outside the stored range.
    pub fn get(&self, n: i64) -> Complex<T> {
        if n.unsigned_abs() as usize > self.order {
            return Complex::new(T::zero(), T::zero());
        }
        self.coeffs[(n + self.order as i64) as usize]
    }

    pub fn set(&mut self, n: i64, value: Complex<T>) {
        assert!(n.unsigned_abs() as usize <= self.order, "mode {n} outside order {}", self.order);
        self.coeffs[(n + self.order as i64) as usize] = value;
    }

    /// Applies a per-mode multiplier.
    pub fn map_modes(&self, f: impl Fn(i64, Complex<T>) -> Complex<T>) -> Self {
        Self::from_fn(self.order, |n| f(n, self.get(n)))
    }

    /// Trapezoidal approximation of `(1/2π) ∫ f(θ) e^{-inθ} dθ` from samples at
    /// `θ_j = 2πj/len`. Exact for trigonometric polynomials of degree `≤ order`
    /// when `len ≥ 2 order + 1`.
    pub fn analyze(samples: &[Complex<T>], order: usize) -> Result<Self> {
        let len = samples.len();
        if len < 2 * order + 1 {
            return Err(Error::InsufficientSamples { required: 2 * order + 1, got: len });
        }
        let thetas = periodic_nodes::<T>(len);
        let scale = T::one() / from_usize::<T>(len);
        Ok(Self::from_fn(order, |n| {
            let nf = from_i64::<T>(n);
            samples
                .iter()
                .zip(&thetas)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (s, &t)| acc + *s * cis(-nf * t))
                * scale
        }))
    }

    /// Like [`analyze`](Self::analyze) for real samples; the result is exactly
    /// conjugate-symmetric.
    pub fn analyze_real(samples: &[T], order: usize) -> Result<Self> {
        let len = samples.len();
        if len < 2 * order + 1 {
            return Err(Error::InsufficientSamples { required: 2 * order + 1, got: len });
        }
        let thetas = periodic_nodes::<T>(len);
        let scale = T::one() / from_usize::<T>(len);
        let mut out = Self::zeros(order);
        for n in 0..=order as i64 {
            let nf = from_i64::<T>(n);
            let c = samples
                .iter()
                .zip(&thetas)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&s, &t)| acc + cis(-nf * t) * s)
                * scale;
            out.set(n, c);
            out.set(-n, c.conj());
        }
        Ok(out)
    }

    /// `Σ_{|n| ≤ N} f_n e^{inθ}`.
    pub fn eval(&self, theta: T) -> Complex<T> {
        self.modes()
            .zip(&self.coeffs)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (n, c)| acc + *c * cis(from_i64::<T>(n) * theta))
    }

    /// Values at `len` equally spaced nodes.
    pub fn sample(&self, len: usize) -> Vec<Complex<T>> {
        periodic_nodes::<T>(len).into_iter().map(|t| self.eval(t)).collect()
    }

    /// `(Σ (1 + n²)^{±1/2} |f_n|²)^{1/2}`.
    pub fn sobolev_half_norm(&self, sign: HalfSign) -> T {
        let half = lit::<T>(0.5);
        self.modes()
            .zip(&self.coeffs)
            .map(|(n, c)| {
                let w = (T::one() + from_i64::<T>(n * n)).sqrt();
                let w = match sign {
                    HalfSign::Plus => w,
                    HalfSign::Minus => T::one() / w,
                };
                w * c.norm_sqr()
            })
            .fold(T::zero(), |a, b| a + b)
            .powf(half)
    }

    pub fn l2_norm(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
    }
}
