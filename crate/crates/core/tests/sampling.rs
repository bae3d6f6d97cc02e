use std::f64::consts::PI;

use approx::assert_relative_eq;
use inclusion_core::annulus::AnnulusConfig;
use inclusion_core::bie::*;
use inclusion_core::geometry::{BoundaryCurve, BoundaryRole, FourierData};
use inclusion_core::regularization::*;
use inclusion_core::sampling::*;
use inclusion_core::{Complex, Error};
use nalgebra::{DMatrix, Point2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn concentric(rho: f64, basis: Basis) -> DtnOperator<f64> {
    let nm = match basis {
        Basis::Collocation(n) => n,
        _ => 64,
    };
    let outer = NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, nm).unwrap();
    let inner = NystromMesh::new(BoundaryCurve::centered_circle(rho).unwrap(), BoundaryRole::Inner, 32).unwrap();
    let op = ForwardOperator::new(outer, inner, InclusionBc::Dirichlet).unwrap();
    dtn_matrix(&op, basis).unwrap()
}

const F19: Basis = Basis::Fourier(ModeSet::Symmetric(19));

#[test]
fn poisson_examples() {
    let b = poisson_rhs(&Point2::new(0.0, 0.0), Basis::Collocation(16)).unwrap();
    for v in b.iter() {
        assert_relative_eq!(v.re, 1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(v.re, 0.159155, epsilon = 1e-6);
    }
    let b = poisson_rhs(&Point2::new(0.5, 0.0), Basis::Collocation(16)).unwrap();
    assert_relative_eq!(b[0].re, 3.0 / (2.0 * PI), epsilon = 1e-14);
    assert_relative_eq!(b[0].re, 0.477465, epsilon = 1e-6);
    assert!(matches!(
        poisson_rhs(&Point2::new(0.995, 0.0), Basis::Collocation(8)),
        Err(Error::TooCloseToBoundary { .. })
    ));
}

#[test]
fn poisson_kernel_integrates_to_one() {
    for z in [Point2::new(0.0, 0.0), Point2::new(0.3, -0.4), Point2::new(-0.8, 0.1)] {
        let n = 256;
        let b = poisson_rhs(&z, Basis::Collocation(n)).unwrap();
        let integral: f64 = b.iter().map(|v| v.re).sum::<f64>() * 2.0 * PI / n as f64;
        assert_relative_eq!(integral, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn poisson_coefficients_match_analysis() {
    for z in [Point2::new(0.8, 0.0), Point2::new(0.2, 0.5), Point2::new(-0.5, -0.6)] {
        let samples: Vec<f64> = (0..256).map(|j| poisson_kernel(&z, 2.0 * PI * j as f64 / 256.0)).collect();
        let analysed = FourierData::analyze_real(&samples, 10).unwrap();
        let closed = poisson_rhs(&z, Basis::Fourier(ModeSet::Symmetric(10))).unwrap();
        for (k, n) in (-10..=10i64).enumerate() {
            assert!((analysed.get(n) - closed[k]).norm() < 1e-10, "z={z:?} n={n}");
        }
    }
}

#[test]
fn one_sided_rhs_is_nodal() {
    let z = Point2::new(0.3, 0.2);
    let b = poisson_rhs(&z, Basis::Fourier(ModeSet::OneSided(20))).unwrap();
    assert_eq!(b.len(), 20);
    assert_relative_eq!(b[5].re, poisson_kernel(&z, 2.0 * PI * 5.0 / 20.0), epsilon = 1e-15);
}

/// Mode-wise solution of the diagonal concentric system.
fn closed_form(cfg: &AnnulusConfig<f64>, z: &Point2<f64>, order: i64) -> Vec<Complex<f64>> {
    let r = z.coords.norm();
    let tz = z.y.atan2(z.x);
    (-order..=order)
        .map(|n| Complex::from_polar(r.powi(n.abs() as i32) / (2.0 * PI), -(n as f64) * tz) / cfg.gap_coefficient(n))
        .collect()
}

#[test]
fn gap_solution_matches_closed_form() {
    // order 10 keeps 1/c_n small enough that quadrature error stays invisible
    let dtn = concentric(0.5, Basis::Fourier(ModeSet::Symmetric(10)));
    let cfg = AnnulusConfig::dirichlet(0.5).unwrap();
    let solver = GapSolver::new(&dtn, RegStrategy::None).unwrap();
    for z in [Point2::new(0.0, 0.0), Point2::new(0.2, 0.0), Point2::new(0.3, -0.2)] {
        let f = solver.solve(&z).unwrap().f;
        let oracle = closed_form(&cfg, &z, 10);
        let err = f.iter().zip(&oracle).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale = oracle.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / scale < 1e-6, "z={z:?} rel err {}", err / scale);
    }
    let solver = GapSolver::new(&concentric(0.5, F19), RegStrategy::None).unwrap();
    let f0 = solver.solve(&Point2::new(0.0, 0.0)).unwrap().f[19];
    assert_relative_eq!(f0.re, 0.5f64.ln() / (2.0 * PI), epsilon = 1e-6);
    assert_relative_eq!(f0.re, -0.110318, epsilon = 1e-6);
}

#[test]
fn outside_points_need_larger_densities() {
    let dtn = concentric(0.5, F19);
    let cfg = AnnulusConfig::dirichlet(0.5).unwrap();
    let norm = |z: Point2<f64>| closed_form(&cfg, &z, 19).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let (inside, outside) = (Point2::new(0.2, 0.0), Point2::new(0.7, 0.0));
    assert!(norm(outside) / norm(inside) > 10.0);
    let a = solve_current_gap(&dtn, &outside, RegStrategy::None).unwrap().f.norm();
    let b = solve_current_gap(&dtn, &inside, RegStrategy::None).unwrap().f.norm();
    assert!(a / b > 10.0);
    let w_in = indicator(&dtn, &inside, RegStrategy::None, IndicatorNorm::L2).unwrap();
    let w_out = indicator(&dtn, &outside, RegStrategy::None, IndicatorNorm::L2).unwrap();
    assert!(w_in / w_out > 10.0);
    assert!(w_in > 0.0 && w_out > 0.0);
}

#[test]
fn unregularized_singular_system_is_an_error() {
    let dtn = concentric(0.25, F19);
    let e = solve_current_gap(&dtn, &Point2::new(0.1, 0.0), RegStrategy::None).unwrap_err();
    assert!(matches!(e, Error::SingularSystem { .. }), "{e:?}");
    let zero = DMatrix::from_element(39, 39, Complex::new(0.0, 0.0));
    let s = GapSolver::from_matrix(F19, zero, RegStrategy::None).unwrap();
    assert!(s.solve(&Point2::new(0.1, 0.0)).is_err());
}

#[test]
fn indicator_is_homogeneous() {
    let dtn = concentric(0.5, F19);
    let solver = GapSolver::new(&dtn, RegStrategy::None).unwrap();
    let b = poisson_rhs(&Point2::new(0.3, 0.1), F19).unwrap();
    let f1 = solver.solve_rhs(&b).unwrap().f.norm();
    let f2 = solver.solve_rhs(&(&b * Complex::new(2.0, 0.0))).unwrap().f.norm();
    assert_relative_eq!((1.0 / f2) / (1.0 / f1), 0.5, epsilon = 1e-10);
}

#[test]
fn indicator_is_rotation_invariant_for_concentric_circles() {
    let dtn = concentric(0.5, F19);
    let reg = RegStrategy::Tikhonov(AlphaChoice::Explicit(1e-8));
    let solver = GapSolver::new(&dtn, reg).unwrap();
    for r in [0.1, 0.4, 0.7] {
        let w0 = solver.indicator(&Point2::new(r, 0.0), IndicatorNorm::L2).unwrap();
        for phi in [0.7, 2.0, 4.4] {
            let w = solver.indicator(&Point2::new(r * f64::cos(phi), r * f64::sin(phi)), IndicatorNorm::L2).unwrap();
            assert!(((w - w0) / w0).abs() < 1e-8, "r={r} phi={phi} {w} {w0}");
        }
    }
}

#[test]
fn monotone_contrast_along_a_ray() {
    let dtn = concentric(0.5, F19);
    let solver = GapSolver::new(&dtn, RegStrategy::None).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..=35 {
        let r = 0.55 + 0.01 * k as f64;
        let w = solver.indicator(&Point2::new(r, 0.0), IndicatorNorm::L2).unwrap();
        assert!(w <= prev, "r={r}");
        prev = w;
    }
}

#[test]
fn bases_agree_on_inside_outside_ordering() {
    let inside = [Point2::new(0.1, 0.0), Point2::new(0.0, 0.3), Point2::new(-0.2, -0.2)];
    let outside = [Point2::new(0.7, 0.0), Point2::new(0.0, -0.8), Point2::new(-0.6, 0.4)];
    let reg = RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Relative(1e-6), safety: 1.5 });
    for basis in [Basis::Collocation(64), F19] {
        let dtn = concentric(0.5, basis);
        let solver = GapSolver::new(&dtn, reg).unwrap();
        for norm in [IndicatorNorm::L2, IndicatorNorm::SobolevHalf] {
            let lo = inside.iter().map(|z| solver.indicator(z, norm).unwrap()).fold(f64::INFINITY, f64::min);
            let hi = outside.iter().map(|z| solver.indicator(z, norm).unwrap()).fold(0.0, f64::max);
            assert!(lo > hi, "{basis:?} {norm:?}: min inside {lo} max outside {hi}");
        }
    }
}

#[test]
fn scan_single_point_and_determinism() {
    let dtn = concentric(0.5, F19);
    let reg = RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Relative(0.05), safety: 1.5 });
    let noise = Some(MatrixNoise { delta: 0.05, seed: 7, norm: NoiseNorm::Spectral });
    let one = GridSpec { resolution: 1, extent: [0.1, 0.1, 0.2, 0.2], mask_radius: 0.9 };
    let g = scan(&dtn, one, reg, IndicatorNorm::L2, noise).unwrap();
    assert_eq!(g.values.len(), 1);
    let noisy = perturb_matrix(&dtn.gap, 0.05, 7, NoiseNorm::Spectral);
    let direct = GapSolver::from_matrix(F19, noisy, reg).unwrap().indicator(&Point2::new(0.1, 0.2), IndicatorNorm::L2);
    assert_eq!(g.values[0], Some(direct.unwrap()));

    let spec = GridSpec::unit_disk(21);
    let a = scan(&dtn, spec, reg, IndicatorNorm::L2, noise).unwrap();
    let b = scan(&dtn, spec, reg, IndicatorNorm::L2, noise).unwrap();
    assert_eq!(a, b);
    for (p, w) in a.samples() {
        assert!(p.coords.norm() <= 0.9 && w > 0.0);
    }
    assert_eq!(a.get(0, 0), None);
    let masked = GridSpec { resolution: 3, extent: [0.95, 0.99, 0.95, 0.99], mask_radius: 0.9 };
    assert_eq!(scan(&dtn, masked, reg, IndicatorNorm::L2, None).unwrap_err(), Error::AllMasked);
}

#[test]
fn gaussian_level_set_is_a_circle() {
    let s = 0.1;
    let t: f64 = 0.2;
    let spec = GridSpec::<f64>::unit_disk(81);
    let grid = IndicatorGrid::from_fn(spec, |z: &Point2<f64>| (-z.coords.norm_squared() / s).exp());
    let pts = extract_level_set(&grid, t).unwrap();
    let radius = (s * (1.0 / t).ln()).sqrt();
    for p in &pts {
        assert!((p.coords.norm() - radius).abs() < spec.spacing());
    }
    // counterclockwise by polar angle
    let angles: Vec<f64> = pts.iter().map(|p| p.y.atan2(p.x)).collect();
    assert!(angles.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(extract_level_set(&grid, 1.0).unwrap_err(), Error::NoContour);
    assert_eq!(extract_level_set(&grid, 1.5).unwrap_err(), Error::NoContour);
}

#[test]
fn level_set_touching_mask_is_rejected() {
    // W decreasing toward the centre: its level set is cut off by the mask
    let grid = IndicatorGrid::from_fn(GridSpec::<f64>::unit_disk(41), |z: &Point2<f64>| 0.01 + z.coords.norm_squared());
    assert_eq!(extract_level_set(&grid, 0.99).unwrap_err(), Error::NoContour);
}

#[test]
fn two_blobs_keep_the_larger() {
    let grid = IndicatorGrid::from_fn(GridSpec::<f64>::unit_disk(81), |z: &Point2<f64>| {
        let a = (-((z.x - 0.4).powi(2) + z.y.powi(2)) / 0.02).exp();
        let b = 0.9 * (-((z.x + 0.4).powi(2) + z.y.powi(2)) / 0.005).exp();
        a + b
    });
    let loops = marching_squares(&grid, 0.3 * grid.max().unwrap());
    assert_eq!(loops.len(), 2);
    let pts = extract_level_set(&grid, 0.3).unwrap();
    assert!(pts.iter().all(|p| p.x > 0.0));
}

#[test]
fn fit_exact_circle() {
    let pts: Vec<Point2<f64>> =
        (0..32).map(|k| 2.0 * PI * k as f64 / 32.0).map(|t| Point2::new(0.5 * t.cos(), 0.5 * t.sin())).collect();
    let fit = fit_trig_curve(&pts, 1, 1e-16).unwrap();
    let c = &fit.coefficients;
    assert_relative_eq!(c.a[0][0], 0.5, epsilon = 1e-10);
    assert_relative_eq!(c.b[1][0], 0.5, epsilon = 1e-10);
    assert!(c.b[0][0].abs() < 1e-10 && c.a[1][0].abs() < 1e-10);
}

fn ellipse_points(n: usize) -> (Vec<f64>, Vec<Point2<f64>>) {
    let t: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let p = t.iter().map(|&t| Point2::new(0.5 * t.cos(), 0.3 * t.sin())).collect();
    (t, p)
}

fn distance_to_ellipse(p: &Point2<f64>) -> f64 {
    // dense sampling oracle
    (0..20000)
        .map(|k| 2.0 * PI * k as f64 / 20000.0)
        .map(|t| (Point2::new(0.5 * t.cos(), 0.3 * t.sin()) - p).norm())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn fit_ellipse_at_its_own_parameter() {
    let (t, pts) = ellipse_points(64);
    let fit = fit_trig_curve_at(&pts, &t, 7, 1e-16).unwrap();
    let curve = fit.curve();
    let worst = (0..200).map(|k| distance_to_ellipse(&curve.point(2.0 * PI * k as f64 / 200.0))).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn fit_ellipse_at_polar_angles() {
    // x(θ_polar) of an ellipse is not a trigonometric polynomial, so degree 7
    // leaves a small truncation error.
    let (_, pts) = ellipse_points(64);
    let fit = fit_trig_curve(&pts, 7, 1e-16).unwrap();
    let curve = fit.curve();
    let worst = (0..200).map(|k| distance_to_ellipse(&curve.point(2.0 * PI * k as f64 / 200.0))).fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst:e}");
}

#[test]
fn fit_rejects_too_few_points() {
    let (_, pts) = ellipse_points(10);
    assert_eq!(fit_trig_curve(&pts, 7, 0.0).unwrap_err(), Error::InsufficientSamples { required: 15, got: 10 });
}

#[test]
fn fit_degenerate_curve_is_reported() {
    // points collapsing onto a segment
    let pts: Vec<Point2<f64>> =
        (0..32).map(|k| 2.0 * PI * k as f64 / 32.0).map(|t| Point2::new(0.5 * t.cos(), 0.0)).collect();
    let params: Vec<f64> = (0..32).map(|k| 2.0 * PI * k as f64 / 32.0).collect();
    assert!(matches!(fit_trig_curve_at(&pts, &params, 2, 0.0), Err(Error::DegenerateFit(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn penalized_fit_is_smoother(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta = 0.01;
        let pts: Vec<Point2<f64>> = (0..64)
            .map(|k| 2.0 * PI * k as f64 / 64.0)
            .map(|t| Point2::new(0.5 * t.cos(), 0.5 * t.sin()) * (1.0 + delta * rng.random_range(-1.0..1.0)))
            .collect();
        let smooth = fit_trig_curve(&pts, 7, fit_lambda_from_noise(delta)).unwrap();
        let raw = fit_trig_curve(&pts, 7, 0.0).unwrap();
        prop_assert!(smooth.h2_seminorm_sq() <= raw.h2_seminorm_sq());
    }
}
