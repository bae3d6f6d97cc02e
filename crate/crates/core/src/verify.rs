//! Self-check suites comparing the numerical pipeline against closed forms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annulus::AnnulusConfig;
use crate::bie::{assemble_double_layer, dtn_matrix, Basis, ForwardOperator, InclusionBc, ModeSet, NystromMesh, Target};
use crate::error::Result;
use crate::geometry::{BoundaryCurve, BoundaryRole};
use crate::regularization::{discrepancy_alpha, residual_norm, tikhonov_solve, Svd};
use crate::sampling::{poisson_kernel, poisson_rhs};
use crate::Complex;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteReport {
    fn below(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), passed: measured < tolerance, measured, tolerance, detail }
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<24} measured {:.3e} tolerance {:.1e}  {}", self.name, self.measured, self.tolerance, self.detail)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Negates the double-layer kernel inside the Gauss-identity suite.
    pub flip_kernel_sign: bool,
}

pub const NODES: usize = 64;
pub const ORACLE_TOL: f64 = 1e-6;
pub const TIKHONOV_TOL: f64 = 1e-10;
pub const DISCREPANCY_TOL: f64 = 1e-8;
pub const GAUSS_TOL: f64 = 1e-8;
pub const POISSON_TOL: f64 = 1e-10;
/// Decay ratios must lie within this factor of `ρ²`.
pub const DECAY_FACTOR: f64 = 2.0;

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn concentric(rho: f64, gamma: Option<f64>, nodes: usize) -> Result<ForwardOperator<f64>> {
    let outer = NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, nodes)?;
    let inner = NystromMesh::new(BoundaryCurve::centered_circle(rho)?, BoundaryRole::Inner, nodes)?;
    let bc = match gamma {
        None => InclusionBc::Dirichlet,
        Some(g) => InclusionBc::constant_impedance(&inner, g),
    };
    ForwardOperator::new(outer, inner, bc)
}

fn annulus(rho: f64, gamma: Option<f64>) -> Result<AnnulusConfig<f64>> {
    match gamma {
        None => AnnulusConfig::dirichlet(rho),
        Some(g) => AnnulusConfig::impedance(rho, g),
    }
}

/// Largest relative ℓ² error of the BIE flux against the annulus series over
/// `cos kθ`, `sin kθ`, `k ≤ 8`.
pub fn annulus_vs_bie() -> Result<SuiteReport> {
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for rho in [0.25, 0.5] {
        for gamma in [None, Some(0.5), Some(2.0)] {
            let op = concentric(rho, gamma, NODES)?;
            let cfg = annulus(rho, gamma)?;
            let th = op.outer().thetas().to_vec();
            let mut cols = Vec::new();
            for k in 0..=8i64 {
                cols.push((k, false));
                if k > 0 {
                    cols.push((k, true));
                }
            }
            let f = DMatrix::from_fn(NODES, cols.len(), |i, j| {
                let (k, sine) = cols[j];
                let a = k as f64 * th[i];
                if sine { a.sin() } else { a.cos() }
            });
            let g = op.flux_many(&f)?;
            for (j, &(k, _)) in cols.iter().enumerate() {
                let c = cfg.lambda0_coefficient(k);
                let expect: Vec<f64> = f.column(j).iter().map(|v| c * v).collect();
                let got: Vec<f64> = g.column(j).iter().copied().collect();
                let e = relative_l2(&got, &expect);
                if e > worst {
                    worst = e;
                    at = format!("ρ={rho} bc={} k={k}", gamma.map_or("dirichlet".into(), |g| format!("γ={g}")));
                }
            }
        }
    }
    Ok(SuiteReport::below("annulus_vs_bie", worst, ORACLE_TOL, format!("worst at {at}")))
}

fn random_system(seed: u64, n: usize) -> (DMatrix<Complex<f64>>, DVector<Complex<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let a = DMatrix::from_fn(n, n, |_, _| c());
    let b = DVector::from_fn(n, |_, _| c());
    (a, b)
}

/// SVD Tikhonov against `(AᴴA + αI)⁻¹Aᴴb` on random 20×20 systems.
pub fn tikhonov_normal_equations() -> Result<SuiteReport> {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let (a, b) = random_system(seed, 20);
        let svd = Svd::new(&a);
        for alpha in [1e-6, 1e-3, 1e-1] {
            let x = tikhonov_solve(&svd, &b, alpha)?;
            let mut normal = a.adjoint() * &a;
            for i in 0..20 {
                normal[(i, i)] += Complex::new(alpha, 0.0);
            }
            let y = normal.lu().solve(&(a.adjoint() * &b)).expect("regularized normal matrix is invertible");
            worst = worst.max((&x - &y).norm() / y.norm());
        }
    }
    Ok(SuiteReport::below("tikhonov_normal_eq", worst, TIKHONOV_TOL, "10 systems × 3 values of α".into()))
}

/// Residual of the discrepancy `α` against its target.
pub fn discrepancy_target() -> Result<SuiteReport> {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let (a, b) = random_system(100 + seed, 20);
        let svd = Svd::new(&a);
        for rel in [1e-1, 1e-3] {
            let delta = rel * b.norm();
            let alpha = discrepancy_alpha(&svd, &b, delta, 1.0)?;
            let r = residual_norm(&svd, &b, alpha);
            worst = worst.max((r - delta).abs() / delta);
        }
    }
    Ok(SuiteReport::below("discrepancy_target", worst, DISCREPANCY_TOL, "10 systems × 2 noise levels".into()))
}

/// `D1 = -2` inside and `0` outside, for the unit circle and an ellipse.
pub fn gauss_identity(opts: VerifyOptions) -> Result<SuiteReport> {
    let sign: f64 = if opts.flip_kernel_sign { -1.0 } else { 1.0 };
    let inside = [Point2::new(0.1, -0.2), Point2::origin(), Point2::new(-0.3, 0.15)];
    let outside = [Point2::new(10.0, 0.0), Point2::new(-2.0, 3.0)];
    let mut worst: f64 = 0.0;
    for curve in [BoundaryCurve::unit_circle(), BoundaryCurve::ellipse(0.5, 0.4)?] {
        let mesh = NystromMesh::new(curve, BoundaryRole::Outer, NODES)?;
        let ones = vec![1.0; NODES];
        for (pts, expect) in [(&inside[..], -2.0), (&outside[..], 0.0)] {
            let d = assemble_double_layer(&mesh, Target::Points { points: pts, normals: None }, true)?;
            for v in d.apply(&ones) {
                worst = worst.max((sign * v - expect).abs());
            }
        }
    }
    let detail = if opts.flip_kernel_sign { "kernel sign flipped" } else { "circle and ellipse" };
    Ok(SuiteReport::below("gauss_identity", worst, GAUSS_TOL, detail.into()))
}

/// `E(N)`: weighted norm of the gap with all modes `|n| ≤ N` removed.
fn tail_norms(gap: &DMatrix<Complex<f64>>, modes: &[i64], orders: std::ops::RangeInclusive<usize>) -> Vec<f64> {
    let w: Vec<f64> = modes.iter().map(|&n| (1.0 + (n * n) as f64).powf(-0.25)).collect();
    orders
        .map(|cut| {
            let tail = DMatrix::from_fn(gap.nrows(), gap.ncols(), |i, j| {
                if modes[i].unsigned_abs() as usize > cut || modes[j].unsigned_abs() as usize > cut {
                    gap[(i, j)] * (w[i] * w[j])
                } else {
                    Complex::new(0.0, 0.0)
                }
            });
            tail.singular_values().max()
        })
        .collect()
}

/// Truncation errors of the BIE gap for a Dirichlet disk `ρ = 0.5`:
/// `E(N+1)/E(N)` compared with `ρ²` for `N = 5..15`.
pub fn truncation_decay() -> Result<SuiteReport> {
    let rho: f64 = 0.5;
    let top = 17;
    let op = concentric(rho, None, 128)?;
    let modes = ModeSet::Symmetric(top);
    let dtn = dtn_matrix(&op, Basis::Fourier(modes))?;
    let e = tail_norms(&dtn.gap, &modes.modes(), 5..=16);
    let target = rho * rho;
    let worst = e
        .windows(2)
        .map(|w| (w[1] / w[0] / target).ln().abs())
        .fold(0.0, f64::max)
        .exp();
    Ok(SuiteReport::below(
        "truncation_decay",
        worst,
        DECAY_FACTOR,
        format!("largest factor between E(N+1)/E(N) and ρ² = {target}"),
    ))
}

/// `‖A - Aᵀ‖₂ / ‖A‖₂` for the gap of an ellipse impedance inclusion in the real
/// trigonometric basis.
pub fn real_trig_symmetry() -> Result<SuiteReport> {
    let outer = NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, NODES)?;
    let inner = NystromMesh::new(BoundaryCurve::ellipse(0.5, 0.3)?, BoundaryRole::Inner, NODES)?;
    let bc = InclusionBc::impedance_fn(&inner, |t: f64| 2.0 - t.sin().powi(4));
    let op = ForwardOperator::new(outer, inner, bc)?;
    let a = dtn_matrix(&op, Basis::Fourier(ModeSet::Symmetric(10)))?.gap_real_trig()?;
    let asym = (&a - a.transpose()).singular_values().max() / a.singular_values().max();
    Ok(SuiteReport::below("real_trig_symmetry", asym, ORACLE_TOL, "ellipse, γ = 2 - sin⁴θ".into()))
}

/// Poisson-kernel normalization and Fourier coefficients.
pub fn poisson_kernel_suite() -> Result<SuiteReport> {
    let mut worst: f64 = 0.0;
    for z in [Point2::new(0.0, 0.0), Point2::new(0.5, 0.0), Point2::new(-0.3, 0.6), Point2::new(0.8 / 2f64.sqrt(), -0.8 / 2f64.sqrt())] {
        let n = 512;
        let integral: f64 = (0..n).map(|k| poisson_kernel(&z, 2.0 * PI * k as f64 / n as f64)).sum::<f64>() * 2.0 * PI / n as f64;
        worst = worst.max((integral - 1.0).abs());
        let order = 10;
        let f = poisson_rhs(&z, Basis::Fourier(ModeSet::Symmetric(order)))?;
        let (r, t) = (z.coords.norm(), z.y.atan2(z.x));
        for (i, m) in (-(order as i64)..=order as i64).enumerate() {
            let expect = Complex::from_polar(r.powi(m.abs() as i32) / (2.0 * PI), -(m as f64) * t);
            worst = worst.max((f[i] - expect).norm());
        }
    }
    Ok(SuiteReport::below("poisson_kernel", worst, POISSON_TOL, "|z| ≤ 0.8".into()))
}

/// `σ₀` of the impedance annulus (ρ = 0.5, γ = 2) from the BIE solver, against
/// the re-derived and the printed closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sigma0Comparison {
    pub bie: f64,
    pub derived: f64,
    pub printed: f64,
}

impl Sigma0Comparison {
    pub fn compute() -> Result<Self> {
        let (rho, gamma) = (0.5, 2.0);
        let op = concentric(rho, Some(gamma), NODES)?;
        let g = op.solve(&[1.0; NODES])?.flux;
        let bie = -g.iter().sum::<f64>() / NODES as f64;
        let cfg = AnnulusConfig::impedance(rho, gamma)?;
        Ok(Self { bie, derived: cfg.sigma_n(0).unwrap_or(f64::NAN), printed: cfg.sigma0_printed().unwrap_or(f64::NAN) })
    }
}

pub fn sigma0_adjudication() -> Result<SuiteReport> {
    let c = Sigma0Comparison::compute()?;
    let agree = (c.bie - c.derived).abs();
    let disagree = (c.bie - c.printed).abs();
    let passed = agree < ORACLE_TOL && disagree > 10.0 * ORACLE_TOL;
    Ok(SuiteReport {
        name: "sigma0_adjudication".into(),
        passed,
        measured: agree,
        tolerance: ORACLE_TOL,
        detail: format!(
            "BIE σ₀ = {:.8}, re-derived {:.8} (diff {agree:.1e}), printed {:.8} (diff {disagree:.1e}): {}",
            c.bie,
            c.derived,
            c.printed,
            if passed { "re-derived form confirmed" } else { "inconclusive" }
        ),
    })
}

type Suite = Box<dyn Fn() -> Result<SuiteReport>>;

/// Runs every suite. A suite that errors is reported as failed.
pub fn run_all(opts: VerifyOptions) -> Vec<SuiteReport> {
    let suites: Vec<(&str, Suite)> = vec![
        ("annulus_vs_bie", Box::new(annulus_vs_bie)),
        ("tikhonov_normal_eq", Box::new(tikhonov_normal_equations)),
        ("discrepancy_target", Box::new(discrepancy_target)),
        ("gauss_identity", Box::new(move || gauss_identity(opts))),
        ("truncation_decay", Box::new(truncation_decay)),
        ("real_trig_symmetry", Box::new(real_trig_symmetry)),
        ("poisson_kernel", Box::new(poisson_kernel_suite)),
        ("sigma0_adjudication", Box::new(sigma0_adjudication)),
    ];
    suites
        .into_iter()
        .map(|(name, run)| {
            run().unwrap_or_else(|e| SuiteReport {
                name: name.into(),
                passed: false,
                measured: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}
