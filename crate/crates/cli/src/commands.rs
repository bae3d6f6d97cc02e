use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use inclusion_core::bie::{dtn_matrix_with_noise, Basis, FluxNoise, ForwardOperator, InclusionBc, NystromMesh};
use inclusion_core::geometry::{BoundaryCurve, BoundaryRole};
use inclusion_core::impedance::{
    assemble_completion, recover_gamma_averaged, simulate_pairs, trig_voltages, CauchyPair, CompletionReg,
    NOISELESS_FLOOR,
};
use inclusion_core::io::{
    fmt_f64, gamma_pairs_json, parse_geometry, read_indicator_csv, write_gamma_csv, write_indicator_csv, BcSpec,
    CurveFile, DtnFile, GeometrySpec,
};
use inclusion_core::regularization::NoiseNorm;
use inclusion_core::sampling::{
    extract_level_set, fit_lambda_from_noise, fit_trig_curve, scan, GridSpec, IndicatorNorm, MatrixNoise,
};
use inclusion_core::verify::{run_all, VerifyOptions};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::spec::{parse_basis, GammaSource, RegSpec};
use crate::{BcKind, ExtractArgs, ForwardArgs, ImpedanceArgs, NormKind, SampleArgs, VerifyArgs};

/// Relative discrepancy level used when `--disc-level 0` is requested.
const NOISELESS_LEVEL: f64 = 1e-8;
/// Discrepancy level assumed for noiseless data when none is given.
const DEFAULT_NOISELESS_DISC_LEVEL: f64 = 0.05;
/// Samples used to check that the inclusion lies inside the unit disk.
const CONTAINMENT_SAMPLES: usize = 512;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the command, its parameters and the contents of its inputs.
/// Output paths do not enter.
fn config_hash(command: &str, params: serde_json::Value, inputs: &[&str]) -> String {
    let inputs: Vec<String> = inputs.iter().map(|s| digest(s.as_bytes())).collect();
    let canonical = json!({ "command": command, "params": params, "inputs": inputs });
    digest(canonical.to_string().as_bytes())
}

fn check_noise(delta: f64) -> Result<()> {
    ensure!(delta.is_finite() && (0.0..1.0).contains(&delta), "noise level must lie in [0, 1), got {delta}");
    Ok(())
}

fn load_geometry(path: &Path) -> Result<(GeometrySpec, BoundaryCurve<f64>, String)> {
    let text = read(path)?;
    let spec = parse_geometry(&text).with_context(|| format!("parsing geometry {}", path.display()))?;
    let curve = spec.to_curve()?;
    Ok((spec, curve, text))
}

fn check_inclusion(curve: &BoundaryCurve<f64>) -> Result<()> {
    curve.validate(CONTAINMENT_SAMPLES)?;
    let r = curve.sample(CONTAINMENT_SAMPLES).iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
    ensure!(r < 1.0, "inclusion must lie inside the unit disk (max radius {r})");
    Ok(())
}

fn unit_circle_mesh(n: usize) -> Result<NystromMesh<f64>> {
    Ok(NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, n)?)
}

pub fn forward(a: &ForwardArgs) -> Result<bool> {
    check_noise(a.noise)?;
    let basis = parse_basis(&a.basis)?;
    let (spec, curve, text) = load_geometry(&a.geometry)?;
    check_inclusion(&curve)?;
    let outer_nodes = match basis {
        Basis::Collocation(n) => n,
        Basis::Fourier(_) => a.nodes,
    };
    let outer = unit_circle_mesh(outer_nodes)?;
    let inner = NystromMesh::new(curve, BoundaryRole::Inner, a.nodes)?;

    let (bc, bc_spec, gamma_text) = match a.bc {
        BcKind::Dirichlet => {
            ensure!(a.gamma.is_none(), "--gamma requires --bc impedance");
            (InclusionBc::Dirichlet, BcSpec::Dirichlet, String::new())
        }
        BcKind::Impedance => {
            let arg = a.gamma.as_deref().context("--bc impedance requires --gamma")?;
            let source = GammaSource::load(arg)?;
            let bc = InclusionBc::impedance_fn(&inner, |t| source.eval(t));
            let InclusionBc::Impedance(values) = &bc else { unreachable!() };
            let bc_spec = BcSpec::Impedance { expr: source.describe(), values: values.clone() };
            let text = fs::read_to_string(arg).unwrap_or_else(|_| arg.to_string());
            (bc, bc_spec, text)
        }
    };

    let op = ForwardOperator::new(outer, inner, bc)?;
    log::info!("forward system condition ≈ {:.3e}", op.condition());
    let noise = (a.noise > 0.0).then_some(FluxNoise { delta: a.noise, seed: a.seed });
    let dtn = dtn_matrix_with_noise(&op, basis, noise)?;

    let hash = config_hash(
        "forward",
        json!({ "bc": format!("{:?}", a.bc), "basis": a.basis, "nodes": a.nodes, "noise": a.noise, "seed": a.seed }),
        &[&text, &gamma_text],
    );
    let meta = BTreeMap::from([
        ("config_hash".to_string(), hash),
        ("noise".to_string(), fmt_f64(a.noise)),
        ("seed".to_string(), a.seed.to_string()),
    ]);
    let outer_spec = GeometrySpec::Circle { center: [0.0, 0.0], radius: 1.0 };
    let file = DtnFile::new(&dtn, outer_spec, spec, outer_nodes, a.nodes, bc_spec, meta);
    write(&a.out, &file.to_json()?)?;
    println!("wrote {} ({:?}, dim {})", a.out.display(), basis, dtn.dim());
    Ok(true)
}

pub fn sample(a: &SampleArgs) -> Result<bool> {
    check_noise(a.noise)?;
    ensure!(a.grid >= 2, "grid needs at least 2 points per axis");
    ensure!(a.mask_radius > 0.0 && a.mask_radius < 1.0, "mask radius must lie in (0, 1)");
    let reg = RegSpec::parse(&a.reg)?;
    let level = a.disc_level.unwrap_or(if a.noise > 0.0 { a.noise } else { DEFAULT_NOISELESS_DISC_LEVEL });
    ensure!(level.is_finite() && level >= 0.0, "discrepancy level must be non-negative");
    let level = level.max(NOISELESS_LEVEL);

    let text = read(&a.data)?;
    let dtn = DtnFile::from_json(&text).context("parsing DtN file")?.operator()?;
    let spec = GridSpec { mask_radius: a.mask_radius, ..GridSpec::unit_disk(a.grid) };
    let norm = match a.norm {
        NormKind::L2 => IndicatorNorm::L2,
        NormKind::H12 => IndicatorNorm::SobolevHalf,
    };
    let noise = (a.noise > 0.0).then_some(MatrixNoise { delta: a.noise, seed: a.seed, norm: NoiseNorm::Spectral });
    let grid = scan(&dtn, spec, reg.relative(level), norm, noise)?;

    let hash = config_hash(
        "sample",
        json!({
            "grid": a.grid, "mask_radius": a.mask_radius, "noise": a.noise, "seed": a.seed,
            "reg": a.reg, "disc_level": level, "norm": format!("{:?}", a.norm),
        }),
        &[&text],
    );
    let meta = BTreeMap::from([
        ("config_hash".to_string(), hash),
        ("noise".to_string(), fmt_f64(a.noise)),
        ("disc_level".to_string(), fmt_f64(level)),
        ("reg".to_string(), a.reg.clone()),
    ]);
    write(&a.out, &write_indicator_csv(&grid, &meta)?)?;

    let max = grid.max().unwrap_or(f64::NAN);
    let min = grid.samples().map(|(_, w)| w).fold(f64::INFINITY, f64::min);
    let rel = inclusion_core::sampling::DEFAULT_THRESHOLD;
    println!("W max {max:.6e} min {min:.6e}");
    println!("suggested level {:.6e} (threshold-rel {rel})", rel * max);
    Ok(true)
}

pub fn extract(a: &ExtractArgs) -> Result<bool> {
    ensure!(a.degree >= 1, "degree must be at least 1");
    let text = read(&a.indicator)?;
    let (grid, meta) = read_indicator_csv(&text)?;
    let lambda = match a.lambda {
        Some(l) => l,
        None => {
            let delta: f64 = meta
                .get("disc_level")
                .or_else(|| meta.get("noise"))
                .map(|s| s.parse())
                .transpose()
                .context("bad noise metadata")?
                .unwrap_or(0.0);
            fit_lambda_from_noise(delta)
        }
    };
    ensure!(lambda.is_finite() && lambda >= 0.0, "smoothing weight must be non-negative");

    let points = extract_level_set(&grid, a.threshold_rel)?;
    let fit = fit_trig_curve(&points, a.degree, lambda)?;
    let hash = config_hash(
        "extract",
        json!({ "threshold_rel": a.threshold_rel, "degree": a.degree, "lambda": lambda }),
        &[&text],
    );
    let out_meta = BTreeMap::from([
        ("config_hash".to_string(), hash),
        ("lambda".to_string(), fmt_f64(lambda)),
        ("threshold_rel".to_string(), fmt_f64(a.threshold_rel)),
        ("points".to_string(), points.len().to_string()),
    ]);
    let file = CurveFile::from_coefficients(&fit.coefficients, out_meta);
    write(&a.out, &serde_json::to_string_pretty(&file)?)?;
    let radius = points.iter().map(|p| p.coords.norm()).sum::<f64>() / points.len() as f64;
    println!("{} contour points, mean radius {radius:.4}, degree {}", points.len(), a.degree);
    Ok(true)
}

pub fn impedance(a: &ImpedanceArgs) -> Result<bool> {
    check_noise(a.noise)?;
    ensure!(a.pairs >= 1, "need at least one Cauchy pair");
    ensure!(a.mask_tol >= 0.0 && a.mask_tol < 1.0, "mask tolerance must lie in [0, 1)");
    let reg = RegSpec::parse(&a.reg)?;
    let (spec, curve, geo_text) = load_geometry(&a.geometry)?;
    check_inclusion(&curve)?;
    let model = a.model_error.unwrap_or(if matches!(spec, GeometrySpec::Trig { .. }) { 2.0 } else { 1.0 });
    ensure!(model.is_finite() && model > 0.0, "model-error multiplier must be positive");
    let creg = match reg {
        RegSpec::Discrepancy { safety } => CompletionReg::Discrepancy { safety, floor: NOISELESS_FLOOR, model },
        other => CompletionReg::Fixed(other.relative(0.0)),
    };
    let noise = (a.noise > 0.0).then_some((a.noise, a.seed));

    let (pairs, source_text, truth) = if let Some(data) = &a.data {
        let text = read(data)?;
        let file = DtnFile::from_json(&text).context("parsing DtN file")?;
        let Basis::Collocation(n) = file.basis()? else {
            bail!("impedance recovery needs a collocation DtN file");
        };
        let lambda0 = file.operator()?.lambda0.map(|z| z.re);
        let outer = unit_circle_mesh(n)?;
        let voltages = voltages(&outer, a.pairs);
        let pairs = voltages
            .into_iter()
            .enumerate()
            .map(|(j, f)| {
                let g = lambda0.row_iter().map(|row| row.iter().zip(&f).map(|(l, v)| l * v).sum()).collect();
                let pair = CauchyPair::new(f, g)?;
                Ok(match noise {
                    Some((d, s)) => pair.with_noise(d, s.wrapping_add(j as u64)),
                    None => pair,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (pairs, text, None)
    } else {
        let path = a.true_geometry.as_ref().context("need --data or --true-geometry with --gamma")?;
        let (true_spec, true_curve, text) = load_geometry(path)?;
        check_inclusion(&true_curve)?;
        let gamma = GammaSource::load(a.gamma.as_deref().context("--true-geometry requires --gamma")?)?;
        let outer = unit_circle_mesh(a.nodes)?;
        let inner = NystromMesh::new(true_curve, BoundaryRole::Inner, a.nodes)?;
        let bc = InclusionBc::impedance_fn(&inner, |t| gamma.eval(t));
        let op = ForwardOperator::new(outer, inner, bc)?;
        let pairs = simulate_pairs(&op, &voltages(op.outer(), a.pairs), noise)?;
        let gamma_text = a.gamma.clone().unwrap_or_default();
        let truth = (true_spec == spec).then_some(gamma);
        (pairs, format!("{text}\n{gamma_text}"), truth)
    };

    let outer = unit_circle_mesh(pairs[0].f.len())?;
    let inner = NystromMesh::new(curve, BoundaryRole::Inner, a.nodes)?;
    let sys = assemble_completion(outer, inner)?;
    let rec = recover_gamma_averaged(&sys, &pairs, creg, a.mask_tol)?;

    let hash = config_hash(
        "impedance",
        json!({
            "pairs": a.pairs, "noise": a.noise, "seed": a.seed, "reg": a.reg, "model_error": model,
            "mask_tol": a.mask_tol, "nodes": a.nodes,
        }),
        &[&geo_text, &source_text],
    );
    let meta = BTreeMap::from([
        ("config_hash".to_string(), hash),
        ("pairs".to_string(), a.pairs.to_string()),
        ("noise".to_string(), fmt_f64(a.noise)),
        ("model_error".to_string(), fmt_f64(model)),
    ]);
    write(&a.out, &write_gamma_csv(&rec, &meta)?)?;
    if let Some(p) = &a.pairs_json {
        write(p, &gamma_pairs_json(&rec)?)?;
    }

    let masked = rec.masked().len();
    println!("{} nodes, {masked} masked", rec.thetas.len());
    if let Some(g) = truth {
        println!("relative L2 error {:.4e}", rec.relative_error(|t| g.eval(t)));
    }
    Ok(true)
}

/// The first `k` of `cos θ, sin θ, cos 2θ, sin 2θ, ...`.
fn voltages(mesh: &NystromMesh<f64>, k: usize) -> Vec<Vec<f64>> {
    let mut v = trig_voltages(mesh, k.div_ceil(2));
    v.truncate(k);
    v
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    let reports = run_all(VerifyOptions { flip_kernel_sign: a.flip_kernel_sign });
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} suites, {failed} failed", reports.len());
    Ok(failed == 0)
}
