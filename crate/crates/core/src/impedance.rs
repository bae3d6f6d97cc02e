//! Impedance recovery by data completion.
//!
//! The potential between the curves is represented as
//! `u₀ = D_m φ + D̃_i ψ` with the doubled double layer `D_m` on the outer curve
//! and the modified double layer `D̃_i` on the inclusion. The modification is
//! the kernel `∂_n Φ(x, y) - ln|x|`: with a constant in its place `𝒜` has the
//! null vector `(φ, ψ) = (|Γi|, 1)`, and no double layer carries the net flux
//! that `u₀` generally has. Its boundary traces give
//!
//! ```text
//! 𝒜 [φ; ψ] = [-f; u₀|Γi],   𝒜 = [[I - K_mm, -K̃_im], [K_mi, I + K̃_ii]]
//! g = T_mm φ + T̃_im ψ
//! ```
//!
//! so the measured current is affine in the unknown inclusion trace:
//! `g = R_f f + S u₀|Γi`. Solving that ill-posed system and differentiating the
//! representation on the inclusion yields the Cauchy data from which `γ`
//! follows.

use nalgebra::{DMatrix, DVector, Point2, LU};
use rayon::prelude::*;

use crate::bie::{
    assemble_double_layer, assemble_log_modified_double_layer, assemble_normal_derivative, ForwardOperator,
    NystromMesh, Potential, Target, MAX_CONDITION,
};
use crate::bie::{condition_number, point_in_polygon};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryRole, FourierData};
use crate::regularization::{perturb_vector, AlphaChoice, NoiseLevel, RegStrategy, Svd, DEFAULT_SAFETY};
use crate::scalar::{from_usize, lit, to_f64, Complex, Real};

/// Nodes with `|u₀| < DEFAULT_MASK_TOL · max|u₀|` are excluded from `γ`.
pub const DEFAULT_MASK_TOL: f64 = 0.05;
/// Completion fails if its residual exceeds this multiple of the noise level.
pub const RESIDUAL_FACTOR: f64 = 10.0;
/// Normal offset for the finite-difference flux.
pub const FD_OFFSET: f64 = 1e-4;
/// Absolute discrepancy level used for noiseless data.
pub const NOISELESS_FLOOR: f64 = 1e-8;

/// Voltage `f` and current `g = Λ₀ f` at the outer nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPair<T> {
    pub f: Vec<T>,
    pub g: Vec<T>,
    /// `(δ, seed)` of the multiplicative noise applied to `g`.
    pub noise: Option<(T, u64)>,
}

impl<T: Real> CauchyPair<T> {
    pub fn new(f: Vec<T>, g: Vec<T>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch(format!("voltage has {} values, current {}", f.len(), g.len())));
        }
        Ok(Self { f, g, noise: None })
    }

    /// Simulates the current with the forward solver.
    pub fn simulate(op: &ForwardOperator<T>, f: Vec<T>) -> Result<Self> {
        let g = op.solve(&f)?.flux;
        Self::new(f, g)
    }

    /// Perturbs the current by `g_j (1 + δ e_j)`.
    pub fn with_noise(mut self, delta: T, seed: u64) -> Self {
        self.g = perturb_vector(&self.g, delta, seed);
        self.noise = Some((delta, seed));
        self
    }

    /// Expected norm of the current perturbation, `δ ‖g‖ / √3`.
    pub fn noise_norm(&self) -> T {
        match self.noise {
            Some((delta, _)) => delta * norm(&self.g) / lit::<T>(3.0).sqrt(),
            None => T::zero(),
        }
    }
}

/// `cos kθ` and `sin kθ`, `k = 1..=kmax`, at the mesh nodes, interleaved.
pub fn trig_voltages<T: Real>(mesh: &NystromMesh<T>, kmax: usize) -> Vec<Vec<T>> {
    let th = mesh.thetas();
    (1..=kmax)
        .flat_map(|k| {
            let k = from_usize::<T>(k);
            [th.iter().map(|&t| (k * t).cos()).collect(), th.iter().map(|&t| (k * t).sin()).collect()]
        })
        .collect()
}

/// Simulated pairs; pair `j` gets noise seed `seed + j`.
pub fn simulate_pairs<T: Real>(
    op: &ForwardOperator<T>,
    voltages: &[Vec<T>],
    noise: Option<(T, u64)>,
) -> Result<Vec<CauchyPair<T>>> {
    let nm = op.outer().len();
    let f = DMatrix::from_fn(nm, voltages.len(), |i, j| voltages[j][i]);
    if voltages.iter().any(|v| v.len() != nm) {
        return Err(Error::DimensionMismatch(format!("voltages must have {nm} values")));
    }
    let g = op.flux_many(&f)?;
    Ok(voltages
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let pair = CauchyPair { f: v.clone(), g: g.column(j).iter().copied().collect(), noise: None };
            match noise {
                Some((delta, seed)) => pair.with_noise(delta, seed.wrapping_add(j as u64)),
                None => pair,
            }
        })
        .collect())
}

/// Assembled and factorized completion operator.
#[derive(Debug, Clone)]
pub struct CompletionSystem<T: Real> {
    outer: NystromMesh<T>,
    inner: NystromMesh<T>,
    a: DMatrix<T>,
    lu: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
    flux_row: DMatrix<T>,
    r_f: DMatrix<T>,
    s: DMatrix<T>,
    s_svd: Svd<T>,
    /// Normal derivatives on the inclusion w.r.t. its outward normal.
    inner_from_outer: DMatrix<T>,
    inner_from_inner: DMatrix<T>,
}

/// Recovered Cauchy data on the inclusion for one pair.
#[derive(Debug, Clone)]
pub struct Completion<T: Real> {
    /// `u₀` at the inclusion nodes.
    pub trace: Vec<T>,
    /// `∂_ν u₀` at the inclusion nodes, `ν` pointing into the inclusion.
    pub flux: Vec<T>,
    pub phi: Vec<T>,
    pub psi: Vec<T>,
    /// `‖S u₀ - (g - R_f f)‖` on the outer curve.
    pub residual: T,
    pub alpha: Option<T>,
    pub fallback: bool,
}

impl<T: Real> CompletionSystem<T> {
    pub fn new(outer: NystromMesh<T>, inner: NystromMesh<T>) -> Result<Self> {
        if outer.role() != BoundaryRole::Outer || inner.role() != BoundaryRole::Inner {
            return Err(Error::InvalidConfig("meshes must be (outer, inner)".into()));
        }
        if inner.points().iter().any(|p| !point_in_polygon(p, outer.points())) {
            return Err(Error::InvalidCurve("inclusion is not strictly inside the outer boundary".into()));
        }
        if !point_in_polygon(&Point2::origin(), inner.points()) {
            return Err(Error::InvalidCurve("inclusion must enclose the origin".into()));
        }
        let (nm, ni) = (outer.len(), inner.len());

        let k_mm = assemble_double_layer(&outer, Target::OnSource, true)?.into_matrix();
        let k_im = assemble_log_modified_double_layer(&inner, Target::Mesh(&outer), true)?.into_matrix();
        let k_mi = assemble_double_layer(&outer, Target::Mesh(&inner), true)?.into_matrix();
        let k_ii = assemble_log_modified_double_layer(&inner, Target::OnSource, true)?.into_matrix();
        let mut a = DMatrix::zeros(nm + ni, nm + ni);
        a.view_mut((0, 0), (nm, nm)).copy_from(&(DMatrix::identity(nm, nm) - k_mm));
        a.view_mut((0, nm), (nm, ni)).copy_from(&(-k_im));
        a.view_mut((nm, 0), (ni, nm)).copy_from(&k_mi);
        a.view_mut((nm, nm), (ni, ni)).copy_from(&(DMatrix::identity(ni, ni) + k_ii));

        let condition = condition_number(&a);
        log::debug!("completion operator condition {condition:.3e}");
        if !(condition < MAX_CONDITION) {
            return Err(Error::SingularSystem { condition });
        }
        let lu = a.clone().lu();

        let t_mm = assemble_normal_derivative(&outer, Target::OnSource, Potential::DoubleLayer, true)?.into_matrix();
        let t_im =
            assemble_normal_derivative(&inner, Target::Mesh(&outer), Potential::LogModifiedDoubleLayer, true)?
                .into_matrix();
        let mut flux_row = DMatrix::zeros(nm, nm + ni);
        flux_row.view_mut((0, 0), (nm, nm)).copy_from(&t_mm);
        flux_row.view_mut((0, nm), (nm, ni)).copy_from(&t_im);

        // B = [T_mm, T̃_im] 𝒜⁻¹, via 𝒜ᵀ Bᵀ = [T_mm, T̃_im]ᵀ
        let bt = a
            .transpose()
            .lu()
            .solve(&flux_row.transpose())
            .ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        let b = bt.transpose();
        let r_f = -b.columns(0, nm).into_owned();
        let s = b.columns(nm, ni).into_owned();
        let s_svd = Svd::from_real(&s);

        let inner_from_outer =
            assemble_normal_derivative(&outer, Target::Mesh(&inner), Potential::DoubleLayer, true)?.into_matrix();
        let inner_from_inner =
            assemble_normal_derivative(&inner, Target::OnSource, Potential::LogModifiedDoubleLayer, true)?
                .into_matrix();

        Ok(Self { outer, inner, a, lu, condition, flux_row, r_f, s, s_svd, inner_from_outer, inner_from_inner })
    }

    pub fn outer(&self) -> &NystromMesh<T> {
        &self.outer
    }

    pub fn inner(&self) -> &NystromMesh<T> {
        &self.inner
    }

    /// 2-norm condition number of `𝒜`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn operator(&self) -> &DMatrix<T> {
        &self.a
    }

    /// `R_f`, the current produced by `f` with a vanishing inclusion trace.
    pub fn voltage_response(&self) -> &DMatrix<T> {
        &self.r_f
    }

    /// `S`, the current produced by an inclusion trace with `f = 0`.
    pub fn trace_response(&self) -> &DMatrix<T> {
        &self.s
    }

    /// Singular values of `S`, descending.
    pub fn trace_singular_values(&self) -> &[T] {
        self.s_svd.singular_values()
    }

    /// `[φ; ψ] = 𝒜⁻¹ [-f; u]`.
    pub fn densities(&self, f: &[T], u: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let (nm, ni) = (self.outer.len(), self.inner.len());
        self.check_lengths(f.len(), u.len())?;
        let rhs = DVector::from_iterator(nm + ni, f.iter().map(|&v| -v).chain(u.iter().copied()));
        let x = self.lu.solve(&rhs).ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        Ok((x.rows(0, nm).iter().copied().collect(), x.rows(nm, ni).iter().copied().collect()))
    }

    /// `R_f f + S u`, the outer current of the potential with traces `f` and `u`.
    pub fn predict_current(&self, f: &[T], u: &[T]) -> Result<Vec<T>> {
        self.check_lengths(f.len(), u.len())?;
        let fv = DVector::from_column_slice(f);
        let uv = DVector::from_column_slice(u);
        Ok((&self.r_f * fv + &self.s * uv).iter().copied().collect())
    }

    /// `T_mm φ + T̃_im ψ`.
    pub fn outer_current(&self, phi: &[T], psi: &[T]) -> Vec<T> {
        let x = DVector::from_iterator(phi.len() + psi.len(), phi.iter().chain(psi).copied());
        (&self.flux_row * x).iter().copied().collect()
    }

    /// `∂_ν u₀` on the inclusion, `ν` pointing into it.
    pub fn inner_flux(&self, phi: &[T], psi: &[T]) -> Vec<T> {
        let d = &self.inner_from_outer * DVector::from_column_slice(phi)
            + &self.inner_from_inner * DVector::from_column_slice(psi);
        d.iter().map(|&v| -v).collect()
    }

    /// `u₀` at points strictly between the curves.
    pub fn potential(&self, phi: &[T], psi: &[T], points: &[Point2<T>]) -> Result<Vec<T>> {
        let target = Target::Points { points, normals: None };
        let a = assemble_double_layer(&self.outer, target, true)?.apply(phi);
        let b = assemble_log_modified_double_layer(&self.inner, target, true)?.apply(psi);
        Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
    }

    /// Recovers the inclusion trace and flux from one pair.
    pub fn complete(&self, pair: &CauchyPair<T>, reg: RegStrategy<T>) -> Result<Completion<T>> {
        let nm = self.outer.len();
        if pair.f.len() != nm || pair.g.len() != nm {
            return Err(Error::DimensionMismatch(format!("pair has {} values, outer mesh {nm} nodes", pair.f.len())));
        }
        let fv = DVector::from_column_slice(&pair.f);
        let b = DVector::from_column_slice(&pair.g) - &self.r_f * &fv;
        let bc = b.map(|v| Complex::new(v, T::zero()));
        let sol = reg.solve(&self.s_svd, &bc)?;
        let trace: Vec<T> = sol.x.iter().map(|c| c.re).collect();
        let residual = (&self.s * DVector::from_column_slice(&trace) - &b).norm();

        let level = match reg {
            RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Absolute(d), .. }) => d,
            RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Relative(d), .. }) => d * b.norm(),
            _ => T::zero(),
        }
        .max(pair.noise_norm());
        if level > T::zero() {
            let limit = lit::<T>(RESIDUAL_FACTOR) * level;
            if residual > limit {
                return Err(Error::ResidualTooLarge { residual: to_f64(residual), limit: to_f64(limit) });
            }
        }

        let (phi, psi) = self.densities(&pair.f, &trace)?;
        let flux = self.inner_flux(&phi, &psi);
        Ok(Completion { trace, flux, phi, psi, residual, alpha: sol.alpha, fallback: sol.fallback })
    }

    /// Flux on the inclusion by one-sided differences along the outward
    /// normal at offsets `h/2` and `h`, combined by Richardson extrapolation.
    /// The inclusion layer is resampled finely enough for the near-boundary
    /// evaluations.
    pub fn inner_flux_fd(&self, completion: &Completion<T>, h: T) -> Result<Vec<T>> {
        let ni = self.inner.len();
        let fine_n = {
            let per_node = to_f64(self.inner.length()) / (to_f64(h) / 8.0);
            let n = (per_node.ceil() as usize).max(ni);
            n + n % 2
        };
        let fine = NystromMesh::new(self.inner.curve().clone(), BoundaryRole::Inner, fine_n)?;
        let psi_fine: Vec<T> = FourierData::analyze_real(&completion.psi, (ni - 1) / 2)?
            .sample(fine_n)
            .into_iter()
            .map(|c| c.re)
            .collect();
        let normals = self.inner.outward_normals();
        let at = |s: T| -> Result<Vec<T>> {
            let pts: Vec<Point2<T>> = self.inner.points().iter().zip(normals).map(|(p, n)| p + n * s).collect();
            let target = Target::Points { points: &pts, normals: None };
            let a = assemble_double_layer(&self.outer, target, true)?.apply(&completion.phi);
            let b = assemble_log_modified_double_layer(&fine, target, true)?.apply(&psi_fine);
            Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
        };
        let half = at(h * lit::<T>(0.5))?;
        let full = at(h)?;
        let three = lit::<T>(3.0);
        let four = lit::<T>(4.0);
        // ∂_n u ≈ (-3u(0) + 4u(h/2) - u(h)) / h; ν = -n
        Ok((0..ni).map(|i| -(four * half[i] - full[i] - three * completion.trace[i]) / h).collect())
    }

    fn check_lengths(&self, f: usize, u: usize) -> Result<()> {
        if f != self.outer.len() || u != self.inner.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} outer and {} inner values, got {f} and {u}",
                self.outer.len(),
                self.inner.len()
            )));
        }
        Ok(())
    }
}

/// Assembles the completion operator for a mesh pair.
pub fn assemble_completion<T: Real>(outer: NystromMesh<T>, inner: NystromMesh<T>) -> Result<CompletionSystem<T>> {
    CompletionSystem::new(outer, inner)
}

/// Recovers `(u₀, ∂_ν u₀)` on the inclusion from one pair.
pub fn complete_cauchy<T: Real>(
    sys: &CompletionSystem<T>,
    pair: &CauchyPair<T>,
    reg: RegStrategy<T>,
) -> Result<Completion<T>> {
    sys.complete(pair, reg)
}

/// How the completion is regularized for each pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompletionReg<T> {
    Fixed(RegStrategy<T>),
    /// Tikhonov with the discrepancy level `model · max(noise, floor)`, where
    /// `noise` is the pair's expected perturbation norm.
    Discrepancy { safety: T, floor: T, model: T },
}

impl<T: Real> Default for CompletionReg<T> {
    fn default() -> Self {
        Self::Discrepancy { safety: lit(DEFAULT_SAFETY), floor: lit(NOISELESS_FLOOR), model: T::one() }
    }
}

impl<T: Real> CompletionReg<T> {
    pub fn for_pair(&self, pair: &CauchyPair<T>) -> RegStrategy<T> {
        match *self {
            Self::Fixed(r) => r,
            Self::Discrepancy { safety, floor, model } => RegStrategy::Tikhonov(AlphaChoice::Discrepancy {
                level: NoiseLevel::Absolute(model * pair.noise_norm().max(floor)),
                safety,
            }),
        }
    }
}

/// `γ = -∂_ν u₀ / u₀` for one pair; `None` marks excluded nodes.
pub fn recover_gamma_pointwise<T: Real>(trace: &[T], flux: &[T], tol_rel: T) -> Result<Vec<Option<T>>> {
    if trace.len() != flux.len() {
        return Err(Error::DimensionMismatch(format!("{} trace values, {} flux values", trace.len(), flux.len())));
    }
    let max = trace.iter().fold(T::zero(), |m, &u| m.max(u.abs()));
    let cut = tol_rel * max;
    let gamma: Vec<Option<T>> =
        trace.iter().zip(flux).map(|(&u, &du)| (u.abs() >= cut && u != T::zero()).then(|| -du / u)).collect();
    if gamma.iter().all(Option::is_none) {
        return Err(Error::AllMasked);
    }
    Ok(gamma)
}

/// Per-node `γ` over several pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReconstruction<T> {
    /// Parameters of the inclusion nodes.
    pub thetas: Vec<T>,
    pub per_pair: Vec<Vec<Option<T>>>,
    /// Mean over unmasked pairs; `None` where every pair was masked.
    pub average: Vec<Option<T>>,
    /// Population standard deviation over unmasked pairs.
    pub spread: Vec<Option<T>>,
    pub pairs_used: Vec<usize>,
}

impl<T: Real> GammaReconstruction<T> {
    pub fn from_pairs(thetas: Vec<T>, per_pair: Vec<Vec<Option<T>>>) -> Result<Self> {
        let n = thetas.len();
        if per_pair.is_empty() {
            return Err(Error::InvalidConfig("need at least one pair".into()));
        }
        if per_pair.iter().any(|p| p.len() != n) {
            return Err(Error::DimensionMismatch(format!("every pair must have {n} values")));
        }
        let mut average = Vec::with_capacity(n);
        let mut spread = Vec::with_capacity(n);
        let mut pairs_used = Vec::with_capacity(n);
        for i in 0..n {
            let mut vals: Vec<T> = per_pair.iter().filter_map(|p| p[i]).collect();
            // order-independent summation
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pairs_used.push(vals.len());
            if vals.is_empty() {
                average.push(None);
                spread.push(None);
                continue;
            }
            let k = from_usize::<T>(vals.len());
            let mean = vals.iter().fold(T::zero(), |a, &b| a + b) / k;
            let var = vals.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / k;
            average.push(Some(mean));
            spread.push(Some(var.sqrt()));
        }
        if average.iter().all(Option::is_none) {
            return Err(Error::AllMasked);
        }
        Ok(Self { thetas, per_pair, average, spread, pairs_used })
    }

    /// Nodes where every pair was masked.
    pub fn masked(&self) -> Vec<usize> {
        (0..self.average.len()).filter(|&i| self.average[i].is_none()).collect()
    }

    /// `‖γ̂ - γ‖ / ‖γ‖` over nodes with an average.
    pub fn relative_error(&self, truth: impl Fn(T) -> T) -> T {
        let (mut num, mut den) = (T::zero(), T::zero());
        for (&t, g) in self.thetas.iter().zip(&self.average) {
            if let Some(g) = g {
                let e = truth(t);
                num += (*g - e) * (*g - e);
                den += e * e;
            }
        }
        (num / den).sqrt()
    }

    /// `max |γ̂ - γ| / |γ|` over nodes with an average.
    pub fn max_relative_error(&self, truth: impl Fn(T) -> T) -> T {
        self.thetas
            .iter()
            .zip(&self.average)
            .filter_map(|(&t, g)| g.map(|g| ((g - truth(t)) / truth(t)).abs()))
            .fold(T::zero(), T::max)
    }
}

/// Completes every pair, recovers `γ` pointwise and averages per node.
pub fn recover_gamma_averaged<T: Real>(
    sys: &CompletionSystem<T>,
    pairs: &[CauchyPair<T>],
    reg: CompletionReg<T>,
    tol_rel: T,
) -> Result<GammaReconstruction<T>> {
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("need at least one Cauchy pair".into()));
    }
    let per_pair = pairs
        .par_iter()
        .map(|p| {
            let c = sys.complete(p, reg.for_pair(p))?;
            match recover_gamma_pointwise(&c.trace, &c.flux, tol_rel) {
                Err(Error::AllMasked) => Ok(vec![None; c.trace.len()]),
                other => other,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GammaReconstruction::from_pairs(sys.inner().thetas().to_vec(), per_pair)
}

/// `γ(θ) = c₀ + Σ_{m=1}^{M} (a_m cos mθ + b_m sin mθ)` fitted by least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaExpansion<T> {
    pub constant: T,
    pub cos: Vec<T>,
    pub sin: Vec<T>,
    /// Singular values above `ε · size · σ₁`.
    pub rank: usize,
    pub rank_deficient: bool,
}

impl<T: Real> GammaExpansion<T> {
    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, theta: T) -> T {
        let mut v = self.constant;
        for m in 0..self.cos.len() {
            let mt = from_usize::<T>(m + 1) * theta;
            v += self.cos[m] * mt.cos() + self.sin[m] * mt.sin();
        }
        v
    }

    /// Coefficients in the order `[c₀, a₁, b₁, a₂, b₂, ...]`.
    pub fn coefficients(&self) -> Vec<T> {
        let mut c = vec![self.constant];
        for m in 0..self.cos.len() {
            c.push(self.cos[m]);
            c.push(self.sin[m]);
        }
        c
    }
}

/// Minimizes `Σ_pairs Σ_n |∂_ν u₀(x_n) + γ(x_n) u₀(x_n)|²` over trigonometric
/// `γ` of the given degree, with optional Tikhonov weight on the coefficients.
pub fn recover_gamma_lsq<T: Real>(
    traces: &[(Vec<T>, Vec<T>)],
    thetas: &[T],
    degree: usize,
    weight: T,
) -> Result<GammaExpansion<T>> {
    let n = thetas.len();
    let size = 2 * degree + 1;
    if traces.is_empty() {
        return Err(Error::InvalidConfig("need at least one pair".into()));
    }
    if size > n {
        return Err(Error::InsufficientSamples { required: size, got: n });
    }
    if traces.iter().any(|(u, du)| u.len() != n || du.len() != n) {
        return Err(Error::DimensionMismatch(format!("traces must have {n} values")));
    }
    if weight < T::zero() {
        return Err(Error::InvalidConfig("weight must be non-negative".into()));
    }
    let basis = |c: usize, t: T| -> T {
        if c == 0 {
            T::one()
        } else {
            let m = from_usize::<T>(c.div_ceil(2)) * t;
            if c % 2 == 1 {
                m.cos()
            } else {
                m.sin()
            }
        }
    };
    let rows = traces.len() * n;
    let mut a = DMatrix::zeros(rows, size);
    let mut b = DVector::zeros(rows);
    for (p, (u, du)) in traces.iter().enumerate() {
        for i in 0..n {
            for c in 0..size {
                a[(p * n + i, c)] = u[i] * basis(c, thetas[i]);
            }
            b[p * n + i] = -du[i];
        }
    }
    let svd = Svd::from_real(&a);
    let sigma = svd.singular_values();
    let s1 = sigma.first().copied().unwrap_or_else(T::zero);
    let rank = sigma.iter().filter(|&&s| s > T::default_epsilon() * from_usize::<T>(size) * s1).count();
    let reg = if weight > T::zero() {
        RegStrategy::Tikhonov(AlphaChoice::Explicit(weight))
    } else {
        RegStrategy::None
    };
    let x = reg.solve(&svd, &b.map(|v| Complex::new(v, T::zero())))?.x;
    let c: Vec<T> = x.iter().map(|z| z.re).collect();
    if rank < size {
        log::warn!("impedance least squares has rank {rank} < {size}");
    }
    Ok(GammaExpansion {
        constant: c[0],
        cos: (0..degree).map(|m| c[2 * m + 1]).collect(),
        sin: (0..degree).map(|m| c[2 * m + 2]).collect(),
        rank,
        rank_deficient: rank < size,
    })
}

/// True when the recovered inclusion trace is negligible against the voltage,
/// `max|u₀|Γi| < tol · max|f|`, as for a perfectly conducting inclusion.
pub fn looks_perfectly_conducting<T: Real>(trace: &[T], f: &[T], tol: T) -> bool {
    let mu = trace.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let mf = f.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    mu < tol * mf
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b * b).sqrt()
}
