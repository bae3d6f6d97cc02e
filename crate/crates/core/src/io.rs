//! File formats: geometry, curve and DtN JSON, indicator and impedance CSV.
//!
//! CSV files start with `# key=value` metadata lines followed by a header row.
//! Floating-point fields carry 17 significant digits.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Point2};
use serde::{Deserialize, Serialize};

use crate::bie::{Basis, DtnOperator, ModeSet};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, TrigCoefficients};
use crate::impedance::GammaReconstruction;
use crate::sampling::{GridSpec, IndicatorGrid};
use crate::Complex;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

/// Curve description as stored in geometry files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometrySpec {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Cardioid,
    Trig {
        a: [Vec<f64>; 2],
        b: [Vec<f64>; 2],
    },
}

impl GeometrySpec {
    pub fn to_curve(&self) -> Result<BoundaryCurve<f64>> {
        match self {
            Self::Circle { center, radius } => BoundaryCurve::circle(Point2::new(center[0], center[1]), *radius),
            Self::Ellipse { a, b } => BoundaryCurve::ellipse(*a, *b),
            Self::Cardioid => Ok(BoundaryCurve::Cardioid),
            Self::Trig { a, b } => Ok(BoundaryCurve::Trig(TrigCoefficients::new(a.clone(), b.clone())?)),
        }
    }

    pub fn from_curve(curve: &BoundaryCurve<f64>) -> Self {
        match curve {
            BoundaryCurve::Circle { center, radius } => Self::Circle { center: [center.x, center.y], radius: *radius },
            BoundaryCurve::Ellipse { a, b } => Self::Ellipse { a: *a, b: *b },
            BoundaryCurve::Cardioid => Self::Cardioid,
            BoundaryCurve::Trig(c) => Self::Trig { a: c.a.clone(), b: c.b.clone() },
        }
    }
}

/// Reads a geometry object. A curve file (`{"M", "a", "b"}`) is accepted as a
/// trigonometric curve.
pub fn parse_geometry(text: &str) -> Result<GeometrySpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(format_err)?;
    if value.get("kind").is_none() && value.get("a").is_some() {
        let c: CurveFile = serde_json::from_value(value).map_err(format_err)?;
        return Ok(GeometrySpec::Trig { a: c.a, b: c.b });
    }
    serde_json::from_value(value).map_err(format_err)
}

/// Fitted curve `{"M", "a", "b"}` with optional metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    #[serde(rename = "M")]
    pub m: usize,
    pub a: [Vec<f64>; 2],
    pub b: [Vec<f64>; 2],
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl CurveFile {
    pub fn from_coefficients(c: &TrigCoefficients<f64>, meta: BTreeMap<String, String>) -> Self {
        Self { m: c.degree(), a: c.a.clone(), b: c.b.clone(), meta }
    }

    pub fn curve(&self) -> Result<BoundaryCurve<f64>> {
        let c = TrigCoefficients::new(self.a.clone(), self.b.clone())?;
        if c.degree() != self.m {
            return Err(Error::Format(format!("M = {} but {} coefficients per row", self.m, c.degree())));
        }
        Ok(BoundaryCurve::Trig(c))
    }
}

/// Inclusion boundary condition as stored in DtN files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BcSpec {
    Dirichlet,
    /// `γ` at the inclusion nodes, with the expression it came from if any.
    Impedance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expr: Option<String>,
        values: Vec<f64>,
    },
}

/// Simulated DtN data: the gap `Λ - Λ₀` and `Λ₀` in one basis, row-major
/// `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnFile {
    /// `"fourier"` or `"collocation"`.
    pub basis: String,
    /// `"symmetric"` or `"one_sided"` for Fourier bases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<String>,
    /// Truncation order `N` (symmetric) or mode count `K` (one-sided).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    pub dim: usize,
    pub gap: Vec<[f64; 2]>,
    pub lambda0: Vec<[f64; 2]>,
    pub outer: GeometrySpec,
    pub inner: GeometrySpec,
    pub outer_nodes: usize,
    pub inner_nodes: usize,
    pub bc: BcSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

fn flatten(m: &DMatrix<Complex<f64>>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn unflatten(v: &[[f64; 2]], n: usize) -> Result<DMatrix<Complex<f64>>> {
    if v.len() != n * n {
        return Err(Error::Format(format!("expected {} entries, found {}", n * n, v.len())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Complex::new(v[i * n + j][0], v[i * n + j][1])))
}

impl DtnFile {
    pub fn basis(&self) -> Result<Basis> {
        match (self.basis.as_str(), self.modes.as_deref()) {
            ("collocation", _) => {
                self.nodes.map(Basis::Collocation).ok_or_else(|| Error::Format("collocation needs nodes".into()))
            }
            ("fourier", Some("one_sided")) => self
                .order
                .map(|k| Basis::Fourier(ModeSet::OneSided(k)))
                .ok_or_else(|| Error::Format("fourier basis needs order".into())),
            ("fourier", None | Some("symmetric")) => self
                .order
                .map(|n| Basis::Fourier(ModeSet::Symmetric(n)))
                .ok_or_else(|| Error::Format("fourier basis needs order".into())),
            (b, m) => Err(Error::Format(format!("unknown basis {b} ({m:?})"))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dtn: &DtnOperator<f64>,
        outer: GeometrySpec,
        inner: GeometrySpec,
        outer_nodes: usize,
        inner_nodes: usize,
        bc: BcSpec,
        meta: BTreeMap<String, String>,
    ) -> Self {
        let (basis, modes, order, nodes) = match dtn.basis {
            Basis::Collocation(n) => ("collocation", None, None, Some(n)),
            Basis::Fourier(ModeSet::Symmetric(n)) => ("fourier", Some("symmetric"), Some(n), None),
            Basis::Fourier(ModeSet::OneSided(k)) => ("fourier", Some("one_sided"), Some(k), None),
        };
        Self {
            basis: basis.into(),
            modes: modes.map(Into::into),
            order,
            nodes,
            dim: dtn.dim(),
            gap: flatten(&dtn.gap),
            lambda0: flatten(&dtn.lambda0),
            outer,
            inner,
            outer_nodes,
            inner_nodes,
            bc,
            meta,
        }
    }

    pub fn operator(&self) -> Result<DtnOperator<f64>> {
        let basis = self.basis()?;
        if basis.dim() != self.dim {
            return Err(Error::Format(format!("dim {} does not match basis {basis:?}", self.dim)));
        }
        let gap = unflatten(&self.gap, self.dim)?;
        let mut op = DtnOperator::from_gap(basis, gap)?;
        op.lambda0 = unflatten(&self.lambda0, self.dim)?;
        Ok(op)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(format_err)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(format_err)
    }
}

fn write_meta(out: &mut String, meta: &BTreeMap<String, String>) {
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
}

fn read_meta(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim().split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn csv_rows(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let found = reader.headers().map_err(format_err)?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::Format(format!("expected header {}, found {}", header.join(","), found.as_slice())));
    }
    reader.records().collect::<std::result::Result<Vec<_>, _>>().map_err(format_err)
}

fn parse_field(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
}

/// Indicator CSV `x,y,W` with the grid layout in the metadata.
pub fn write_indicator_csv(grid: &IndicatorGrid<f64>, meta: &BTreeMap<String, String>) -> Result<String> {
    let mut all = meta.clone();
    let s = grid.spec;
    all.insert("resolution".into(), s.resolution.to_string());
    all.insert("extent".into(), s.extent.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
    all.insert("mask_radius".into(), fmt_f64(s.mask_radius));
    let mut out = String::new();
    write_meta(&mut out, &all);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "W"]).map_err(format_err)?;
    for (p, v) in grid.samples() {
        w.write_record([fmt_f64(p.x), fmt_f64(p.y), fmt_f64(v)]).map_err(format_err)?;
    }
    out.push_str(&String::from_utf8(w.into_inner().map_err(format_err)?).map_err(format_err)?);
    Ok(out)
}

/// Reads an indicator CSV back onto its grid.
pub fn read_indicator_csv(text: &str) -> Result<(IndicatorGrid<f64>, BTreeMap<String, String>)> {
    let meta = read_meta(text);
    let get = |k: &str| meta.get(k).ok_or_else(|| Error::Format(format!("missing metadata {k}")));
    let resolution: usize = get("resolution")?.parse().map_err(format_err)?;
    let extent: Vec<f64> = get("extent")?.split(',').map(parse_field).collect::<Result<_>>()?;
    let extent: [f64; 4] = extent.try_into().map_err(|_| Error::Format("extent needs 4 values".into()))?;
    let mask_radius = parse_field(get("mask_radius")?)?;
    let spec = GridSpec { resolution, extent, mask_radius };
    let mut values = vec![None; resolution * resolution];
    let locate = |v: f64, lo: f64, hi: f64| -> Result<usize> {
        let k = if resolution == 1 { 0.0 } else { (v - lo) / (hi - lo) * (resolution - 1) as f64 };
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 0.0 || r >= resolution as f64 {
            return Err(Error::Format(format!("coordinate {v} is not on the grid")));
        }
        Ok(r as usize)
    };
    for rec in csv_rows(text, &["x", "y", "W"])? {
        let (x, y, w) = (parse_field(&rec[0])?, parse_field(&rec[1])?, parse_field(&rec[2])?);
        let i = locate(x, extent[0], extent[1])?;
        let j = locate(y, extent[2], extent[3])?;
        values[j * resolution + i] = Some(w);
    }
    Ok((IndicatorGrid { spec, values }, meta))
}

/// Impedance CSV `theta,gamma_avg,gamma_std,n_pairs_used`; nodes masked in
/// every pair have empty value fields.
pub fn write_gamma_csv(rec: &GammaReconstruction<f64>, meta: &BTreeMap<String, String>) -> Result<String> {
    let mut out = String::new();
    write_meta(&mut out, meta);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "gamma_avg", "gamma_std", "n_pairs_used"]).map_err(format_err)?;
    for i in 0..rec.thetas.len() {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        w.write_record([fmt_f64(rec.thetas[i]), opt(rec.average[i]), opt(rec.spread[i]), rec.pairs_used[i].to_string()])
            .map_err(format_err)?;
    }
    out.push_str(&String::from_utf8(w.into_inner().map_err(format_err)?).map_err(format_err)?);
    Ok(out)
}

/// One row of an impedance CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub theta: f64,
    pub average: Option<f64>,
    pub spread: Option<f64>,
    pub pairs_used: usize,
}

pub fn read_gamma_csv(text: &str) -> Result<(Vec<GammaRow>, BTreeMap<String, String>)> {
    let opt = |s: &str| if s.trim().is_empty() { Ok(None) } else { parse_field(s).map(Some) };
    let rows = csv_rows(text, &["theta", "gamma_avg", "gamma_std", "n_pairs_used"])?
        .iter()
        .map(|r| {
            Ok(GammaRow {
                theta: parse_field(&r[0])?,
                average: opt(&r[1])?,
                spread: opt(&r[2])?,
                pairs_used: r[3].trim().parse().map_err(format_err)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, read_meta(text)))
}

/// Per-pair `γ` values (`null` where masked) as JSON.
pub fn gamma_pairs_json(rec: &GammaReconstruction<f64>) -> Result<String> {
    #[derive(Serialize)]
    struct Detail<'a> {
        theta: &'a [f64],
        pairs: &'a [Vec<Option<f64>>],
    }
    serde_json::to_string_pretty(&Detail { theta: &rec.thetas, pairs: &rec.per_pair }).map_err(format_err)
}
