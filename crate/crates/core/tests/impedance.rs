use std::f64::consts::PI;

use approx::assert_relative_eq;
use inclusion_core::annulus::AnnulusConfig;
use inclusion_core::bie::*;
use inclusion_core::geometry::{BoundaryCurve, BoundaryRole, FourierData};
use inclusion_core::impedance::*;
use inclusion_core::regularization::*;
use inclusion_core::{Complex, Error};
use nalgebra::{DVector, Point2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 64;

fn meshes(inner: BoundaryCurve<f64>) -> (NystromMesh<f64>, NystromMesh<f64>) {
    (
        NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, N).unwrap(),
        NystromMesh::new(inner, BoundaryRole::Inner, N).unwrap(),
    )
}

fn system(inner: BoundaryCurve<f64>) -> CompletionSystem<f64> {
    let (o, i) = meshes(inner);
    assemble_completion(o, i).unwrap()
}

fn forward(inner: BoundaryCurve<f64>, gamma: impl Fn(f64) -> f64) -> ForwardOperator<f64> {
    let (o, i) = meshes(inner);
    let bc = InclusionBc::impedance_fn(&i, gamma);
    ForwardOperator::new(o, i, bc).unwrap()
}

fn paper_gamma(t: f64) -> f64 {
    2.0 - t.sin().powi(4)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn exact_reg() -> RegStrategy<f64> {
    RegStrategy::Tikhonov(AlphaChoice::Discrepancy { level: NoiseLevel::Absolute(1e-8), safety: DEFAULT_SAFETY })
}

/// Voltage with several modes, its Fourier data and the annulus solution.
fn manufactured(cfg: &AnnulusConfig<f64>) -> (FourierData<f64>, impl Fn(f64, f64) -> f64 + '_) {
    let mut f = FourierData::zeros(3);
    f.set(0, Complex::new(0.5, 0.0));
    f.set(1, Complex::new(0.5, 0.0));
    f.set(-1, Complex::new(0.5, 0.0));
    f.set(3, Complex::new(0.0, -0.15));
    f.set(-3, Complex::new(0.0, 0.15));
    let g = f.clone();
    (f, move |r, t| cfg.potential(&g, r, t).unwrap())
}

#[test]
fn manufactured_densities_reproduce_annulus_solution() {
    let cfg = AnnulusConfig::impedance(0.5, 2.0).unwrap();
    let sys = system(BoundaryCurve::centered_circle(0.5).unwrap());
    let (fd, u) = manufactured(&cfg);
    let th = sys.outer().thetas().to_vec();
    let f: Vec<f64> = th.iter().map(|&t| fd.eval(t).re).collect();
    let trace: Vec<f64> = th.iter().map(|&t| u(0.5, t)).collect();
    let g_series = cfg.dtn_inclusion(&fd);
    let g: Vec<f64> = th.iter().map(|&t| g_series.eval(t).re).collect();

    let (phi, psi) = sys.densities(&f, &trace).unwrap();
    let x = DVector::from_iterator(2 * N, phi.iter().chain(&psi).copied());
    let ax = sys.operator() * x;
    for i in 0..N {
        assert!((ax[i] + f[i]).abs() < 1e-7);
        assert!((ax[N + i] - trace[i]).abs() < 1e-7);
    }
    assert!(rel(&sys.outer_current(&phi, &psi), &g) < 1e-7);
    assert!(rel(&sys.predict_current(&f, &trace).unwrap(), &g) < 1e-7);

    let pts: Vec<Point2<f64>> = [(0.75, 0.3), (0.65, 2.0), (0.8, -1.0)]
        .iter()
        .map(|&(r, t): &(f64, f64)| Point2::new(r * t.cos(), r * t.sin()))
        .collect();
    let v = sys.potential(&phi, &psi, &pts).unwrap();
    for (p, v) in pts.iter().zip(v) {
        let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
        assert_relative_eq!(v, u(r, t), epsilon = 1e-6);
    }
    // ∂_ν u₀ = -γ u₀ on the inclusion
    let flux = sys.inner_flux(&phi, &psi);
    for (d, u) in flux.iter().zip(&trace) {
        assert!((d + 2.0 * u).abs() < 1e-6, "{d} {u}");
    }
}

#[test]
fn modified_and_plain_blocks_agree_on_zero_mean_densities() {
    let (o, i) = meshes(BoundaryCurve::ellipse(0.5, 0.3).unwrap());
    let w: Vec<f64> = i.jacobians().iter().map(|j| j * i.weight()).collect();
    let total: f64 = w.iter().sum();
    let raw: Vec<f64> = i.thetas().iter().map(|t| (3.0 * t).cos() + 0.4 * t.sin() + 0.7).collect();
    let mean = raw.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
    let psi: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    for target in [Target::OnSource, Target::Mesh(&o)] {
        let a = assemble_modified_double_layer(&i, target, true).unwrap().apply(&psi);
        let l = assemble_log_modified_double_layer(&i, target, true).unwrap().apply(&psi);
        let b = assemble_double_layer(&i, target, true).unwrap().apply(&psi);
        for ((x, z), y) in a.iter().zip(&l).zip(&b) {
            assert!((x - y).abs() < 1e-13 && (z - y).abs() < 1e-13);
        }
    }
}

#[test]
fn completion_operator_is_well_conditioned() {
    for inner in [
        BoundaryCurve::centered_circle(0.3).unwrap(),
        BoundaryCurve::ellipse(0.5, 0.3).unwrap(),
        BoundaryCurve::Cardioid,
    ] {
        let c = system(inner.clone()).condition();
        assert!(c.is_finite() && c < 1e6, "{inner:?}: {c:e}");
    }
}

#[test]
fn rejects_bad_meshes() {
    let (o, i) = meshes(BoundaryCurve::centered_circle(0.5).unwrap());
    assert!(assemble_completion(i.clone(), o.clone()).is_err());
    let shifted = NystromMesh::new(
        BoundaryCurve::circle(Point2::new(0.5, 0.0), 0.2).unwrap(),
        BoundaryRole::Inner,
        N,
    )
    .unwrap();
    assert!(matches!(assemble_completion(o, shifted), Err(Error::InvalidCurve(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn factorization_round_trip(seed in any::<u64>()) {
        let sys = system(BoundaryCurve::ellipse(0.5, 0.3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DVector::from_fn(2 * N, |_, _| rng.random_range(-1.0..1.0));
        let ax = sys.operator() * &x;
        let f: Vec<f64> = ax.rows(0, N).iter().map(|v| -v).collect();
        let u: Vec<f64> = ax.rows(N, N).iter().copied().collect();
        let (phi, psi) = sys.densities(&f, &u).unwrap();
        for k in 0..N {
            prop_assert!((phi[k] - x[k]).abs() < 1e-10);
            prop_assert!((psi[k] - x[N + k]).abs() < 1e-10);
        }
    }
}

#[test]
fn completion_recovers_annulus_trace() {
    let cfg = AnnulusConfig::impedance(0.5, 2.0).unwrap();
    let circle = BoundaryCurve::centered_circle(0.5).unwrap();
    let op = forward(circle.clone(), |_| 2.0);
    let sys = system(circle);
    let th = sys.inner().thetas().to_vec();

    let f: Vec<f64> = th.iter().map(|t| t.cos()).collect();
    let pair = CauchyPair::simulate(&op, f).unwrap();
    let c = complete_cauchy(&sys, &pair, exact_reg()).unwrap();
    let cos = FourierData::from_fn(1, |n| Complex::new(if n == 0 { 0.0 } else { 0.5 }, 0.0));
    let truth: Vec<f64> = th.iter().map(|&t| cfg.potential(&cos, 0.5, t).unwrap()).collect();
    assert!(rel(&c.trace, &truth) < 1e-3, "{}", rel(&c.trace, &truth));
    assert!(c.residual < 10.0 * 1e-8);

    let one = CauchyPair::simulate(&op, vec![1.0; N]).unwrap();
    let c = complete_cauchy(&sys, &one, exact_reg()).unwrap();
    let mean = c.trace.iter().sum::<f64>() / N as f64;
    let spread = c.trace.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    assert!(spread / mean.abs() < 1e-3);

    let zero = CauchyPair::new(vec![0.0; N], vec![0.0; N]).unwrap();
    let c = complete_cauchy(&sys, &zero, exact_reg()).unwrap();
    assert!(DVector::from_vec(c.trace).norm() < 1e-10);
}

#[test]
fn completion_matches_forward_representation() {
    let circle = BoundaryCurve::centered_circle(0.5).unwrap();
    let op = forward(circle.clone(), |_| 2.0);
    let sys = system(circle);
    let f: Vec<f64> = sys.outer().thetas().iter().map(|t| (2.0 * t).sin() + 0.3 * t.cos()).collect();
    let pair = CauchyPair::simulate(&op, f.clone()).unwrap();
    let c = complete_cauchy(&sys, &pair, exact_reg()).unwrap();
    let pts: Vec<Point2<f64>> = (0..8).map(|k| 0.25 * PI * k as f64).map(|t| Point2::new(0.7 * t.cos(), 0.7 * t.sin())).collect();
    let a = sys.potential(&c.phi, &c.psi, &pts).unwrap();
    let b = op.solve(&f).unwrap().potential(&pts).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6, "{x} {y}");
    }
    // predicted current reproduces the data
    let g = sys.predict_current(&pair.f, &c.trace).unwrap();
    assert!(rel(&g, &pair.g) < 1e-6);
}

#[test]
fn residual_certificate_under_noise() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let op = forward(ellipse.clone(), paper_gamma);
    let sys = system(ellipse);
    let volts = trig_voltages(sys.outer(), 3);
    let pairs = simulate_pairs(&op, &volts, Some((0.04, 11))).unwrap();
    for p in &pairs {
        let c = sys.complete(p, CompletionReg::default().for_pair(p)).unwrap();
        let g = sys.predict_current(&p.f, &c.trace).unwrap();
        let miss: f64 = g.iter().zip(&p.g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(miss <= 2.0 * p.noise_norm(), "{miss} vs {}", p.noise_norm());
    }
}

#[test]
fn residual_too_large_is_reported() {
    let circle = BoundaryCurve::centered_circle(0.5).unwrap();
    let op = forward(circle.clone(), |_| 2.0);
    let sys = system(circle);
    let f: Vec<f64> = sys.outer().thetas().iter().map(|t| (3.0 * t).cos()).collect();
    let pair = CauchyPair::simulate(&op, f).unwrap().with_noise(1e-6, 1);
    let e = sys.complete(&pair, RegStrategy::Cutoff(0.9)).unwrap_err();
    assert!(matches!(e, Error::ResidualTooLarge { .. }), "{e:?}");
}

#[test]
fn finite_difference_flux_agrees() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let op = forward(ellipse.clone(), paper_gamma);
    let sys = system(ellipse);
    let f: Vec<f64> = sys.outer().thetas().iter().map(|t| t.cos() + 0.2 * (2.0 * t).sin()).collect();
    let pair = CauchyPair::simulate(&op, f).unwrap();
    let c = sys.complete(&pair, exact_reg()).unwrap();
    let fd = sys.inner_flux_fd(&c, FD_OFFSET).unwrap();
    let scale = c.flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in fd.iter().zip(&c.flux) {
        assert!((a - b).abs() < 1e-5 * scale, "{a} {b}");
    }
}

#[test]
fn pointwise_examples() {
    let g = recover_gamma_pointwise(&[1.0; 8], &[-2.0; 8], 0.05).unwrap();
    assert!(g.iter().all(|v| *v == Some(2.0)));

    let th: Vec<f64> = (0..32).map(|k| 2.0 * PI * k as f64 / 32.0 + 0.01).collect();
    let u: Vec<f64> = th.iter().map(|t| t.cos()).collect();
    let du: Vec<f64> = u.iter().map(|u| -1.5 * u).collect();
    let g = recover_gamma_pointwise(&u, &du, 0.05).unwrap();
    for (k, v) in g.iter().enumerate() {
        if u[k].abs() < 0.05 {
            assert_eq!(*v, None);
        } else {
            assert_relative_eq!(v.unwrap(), 1.5, epsilon = 1e-12);
        }
    }
    assert!(g.iter().filter(|v| v.is_none()).count() >= 2);
    assert_eq!(recover_gamma_pointwise(&[0.0; 4], &[1.0; 4], 0.05).unwrap_err(), Error::AllMasked);
}

#[test]
fn pointwise_recovery_on_concentric_circles() {
    let circle = BoundaryCurve::centered_circle(0.5).unwrap();
    let op = forward(circle.clone(), |_| 2.0);
    let sys = system(circle);
    let f: Vec<f64> = sys.outer().thetas().iter().map(|t| t.cos()).collect();
    let pair = CauchyPair::simulate(&op, f).unwrap();
    let c = sys.complete(&pair, exact_reg()).unwrap();
    let g = recover_gamma_pointwise(&c.trace, &c.flux, DEFAULT_MASK_TOL).unwrap();
    let worst = g.iter().flatten().fold(0.0f64, |m, v| m.max((v - 2.0).abs() / 2.0));
    assert!(worst < 1e-2, "{worst}");

    let avg = recover_gamma_averaged(&sys, &[pair], CompletionReg::Fixed(exact_reg()), DEFAULT_MASK_TOL).unwrap();
    assert_eq!(avg.per_pair[0], g);
    assert_eq!(avg.average, g);
    assert!(avg.max_relative_error(|_| 2.0) < 1e-2);
}

#[test]
fn lsq_examples() {
    let th: Vec<f64> = (0..16).map(|k| 2.0 * PI * k as f64 / 16.0).collect();
    let e = recover_gamma_lsq(&[(vec![1.0; 16], vec![-2.0; 16])], &th, 0, 0.0).unwrap();
    assert_relative_eq!(e.constant, 2.0, epsilon = 1e-12);
    assert!(!e.rank_deficient);

    let u: Vec<f64> = th.iter().map(|t| 1.0 + 0.5 * t.sin()).collect();
    let du: Vec<f64> = th.iter().zip(&u).map(|(t, u)| -paper_gamma(*t) * u).collect();
    let once = recover_gamma_lsq(&[(u.clone(), du.clone())], &th, 4, 0.0).unwrap();
    let twice = recover_gamma_lsq(&[(u.clone(), du.clone()), (u.clone(), du.clone())], &th, 4, 0.0).unwrap();
    for (a, b) in once.coefficients().iter().zip(twice.coefficients()) {
        assert!((a - b).abs() < 1e-12);
    }
    for t in &th {
        assert_relative_eq!(once.eval(*t), paper_gamma(*t), epsilon = 1e-10);
    }
    // a trace vanishing on half the nodes cannot determine a degree-7 γ
    let half: Vec<f64> = (0..16).map(|k| if k < 8 { 1.0 } else { 0.0 }).collect();
    let e = recover_gamma_lsq(&[(half.clone(), half)], &th, 7, 0.0).unwrap();
    assert!(e.rank_deficient);
    assert!(recover_gamma_lsq(&[(u, du)], &th, 8, 0.0).is_err());
}

#[test]
fn lsq_recovers_paper_impedance() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let op = forward(ellipse.clone(), paper_gamma);
    let sys = system(ellipse);
    let pairs = simulate_pairs(&op, &trig_voltages(sys.outer(), 8), None).unwrap();
    let traces: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .iter()
        .map(|p| {
            let c = sys.complete(p, exact_reg()).unwrap();
            (c.trace, c.flux)
        })
        .collect();
    let e = recover_gamma_lsq(&traces, sys.inner().thetas(), 4, 0.0).unwrap();
    for &t in sys.inner().thetas() {
        assert!((e.eval(t) - paper_gamma(t)).abs() < 0.02 * paper_gamma(t), "θ={t}: {}", e.eval(t));
    }
}

#[test]
fn averaged_recovery_of_paper_impedance() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let op = forward(ellipse.clone(), paper_gamma);
    let sys = system(ellipse);
    let volts = trig_voltages(sys.outer(), 8);
    assert_eq!(volts.len(), 16);
    let clean = simulate_pairs(&op, &volts, None).unwrap();
    let rec = recover_gamma_averaged(&sys, &clean, CompletionReg::default(), DEFAULT_MASK_TOL).unwrap();
    assert!(rec.masked().is_empty());
    let err = rec.relative_error(paper_gamma);
    assert!(err < 1e-2, "{err}");
}

#[test]
fn averaging_contract_under_noise() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let op = forward(ellipse.clone(), paper_gamma);
    let sys = system(ellipse);
    let mut pairs = simulate_pairs(&op, &trig_voltages(sys.outer(), 8), Some((0.04, 2024))).unwrap();
    let rec = recover_gamma_averaged(&sys, &pairs, CompletionReg::default(), DEFAULT_MASK_TOL).unwrap();
    assert_eq!(rec.per_pair.len(), 16);
    for i in 0..rec.average.len() {
        let vals: Vec<f64> = rec.per_pair.iter().filter_map(|p| p[i]).collect();
        assert_eq!(vals.len(), rec.pairs_used[i]);
        match rec.average[i] {
            Some(a) => assert_relative_eq!(a, vals.iter().sum::<f64>() / vals.len() as f64, max_relative = 1e-12),
            None => assert!(vals.is_empty()),
        }
    }

    pairs.reverse();
    let rev = recover_gamma_averaged(&sys, &pairs, CompletionReg::default(), DEFAULT_MASK_TOL).unwrap();
    assert_eq!(rev.average, rec.average);
    assert_eq!(rev.spread, rec.spread);
    assert!(recover_gamma_averaged(&sys, &[], CompletionReg::default(), 0.05).is_err());
}

#[test]
fn dirichlet_inclusion_is_detected() {
    let ellipse = BoundaryCurve::ellipse(0.5, 0.3).unwrap();
    let (o, i) = meshes(ellipse.clone());
    let op = ForwardOperator::new(o, i, InclusionBc::Dirichlet).unwrap();
    let sys = system(ellipse.clone());
    for p in simulate_pairs(&op, &trig_voltages(sys.outer(), 4), None).unwrap() {
        let c = sys.complete(&p, exact_reg()).unwrap();
        assert!(looks_perfectly_conducting(&c.trace, &p.f, 0.05));
    }
    let op = forward(ellipse, paper_gamma);
    let p = CauchyPair::simulate(&op, trig_voltages(sys.outer(), 1).remove(0)).unwrap();
    let c = sys.complete(&p, exact_reg()).unwrap();
    assert!(!looks_perfectly_conducting(&c.trace, &p.f, 0.05));
}
