use std::collections::BTreeMap;

use inclusion_core::bie::{dtn_matrix, Basis, ForwardOperator, InclusionBc, ModeSet, NystromMesh};
use inclusion_core::geometry::{BoundaryCurve, BoundaryRole, TrigCoefficients};
use inclusion_core::impedance::GammaReconstruction;
use inclusion_core::io::*;
use inclusion_core::sampling::{GridSpec, IndicatorGrid};
use inclusion_core::Error;
use nalgebra::Point2;

fn meta() -> BTreeMap<String, String> {
    BTreeMap::from([("config_hash".to_string(), "abc123".to_string())])
}

#[test]
fn fmt_keeps_17_digits() {
    let x = 0.1f64 + 0.2;
    assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
}

#[test]
fn geometry_specs_parse() {
    let c = parse_geometry(r#"{"kind":"circle","radius":0.3}"#).unwrap();
    assert_eq!(c, GeometrySpec::Circle { center: [0.0, 0.0], radius: 0.3 });
    assert_eq!(c.to_curve().unwrap(), BoundaryCurve::centered_circle(0.3).unwrap());
    let e = parse_geometry(r#"{"kind":"ellipse","a":0.5,"b":0.3}"#).unwrap();
    assert_eq!(e.to_curve().unwrap(), BoundaryCurve::ellipse(0.5, 0.3).unwrap());
    assert_eq!(parse_geometry(r#"{"kind":"cardioid"}"#).unwrap(), GeometrySpec::Cardioid);
    let t = parse_geometry(r#"{"M":1,"a":[[0.5],[0.0]],"b":[[0.0],[0.3]]}"#).unwrap();
    let curve = t.to_curve().unwrap();
    let p = curve.point(0.7);
    assert!((p.x - 0.5 * 0.7f64.cos()).abs() < 1e-15 && (p.y - 0.3 * 0.7f64.sin()).abs() < 1e-15);
    assert!(matches!(parse_geometry(r#"{"kind":"square"}"#), Err(Error::Format(_))));
    assert!(parse_geometry(r#"{"kind":"circle","radius":-1}"#).unwrap().to_curve().is_err());
}

#[test]
fn curve_file_round_trip() {
    let c = TrigCoefficients::new([vec![0.5, 0.01], vec![0.0, 0.0]], [vec![0.0, 0.0], vec![0.3, -0.02]]).unwrap();
    let f = CurveFile::from_coefficients(&c, meta());
    let text = serde_json::to_string(&f).unwrap();
    assert!(text.contains("\"M\":2"));
    let back: CurveFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.curve().unwrap(), BoundaryCurve::Trig(c));
    let bad = CurveFile { m: 3, ..back };
    assert!(bad.curve().is_err());
}

#[test]
fn dtn_file_round_trip() {
    let outer = NystromMesh::new(BoundaryCurve::unit_circle(), BoundaryRole::Outer, 32).unwrap();
    let inner = NystromMesh::new(BoundaryCurve::ellipse(0.4, 0.25).unwrap(), BoundaryRole::Inner, 32).unwrap();
    let bc = InclusionBc::constant_impedance(&inner, 2.0);
    let op = ForwardOperator::new(outer, inner, bc).unwrap();
    for basis in [Basis::Fourier(ModeSet::Symmetric(5)), Basis::Fourier(ModeSet::OneSided(6)), Basis::Collocation(32)] {
        let dtn = dtn_matrix(&op, basis).unwrap();
        let file = DtnFile::new(
            &dtn,
            GeometrySpec::Circle { center: [0.0, 0.0], radius: 1.0 },
            GeometrySpec::Ellipse { a: 0.4, b: 0.25 },
            32,
            32,
            BcSpec::Impedance { expr: Some("2".into()), values: vec![2.0; 32] },
            meta(),
        );
        let text = file.to_json().unwrap();
        let back = DtnFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        let op2 = back.operator().unwrap();
        assert_eq!(op2.basis, basis);
        assert_eq!(op2.gap, dtn.gap);
        assert_eq!(op2.lambda0, dtn.lambda0);
    }
}

#[test]
fn dtn_file_rejects_wrong_sizes() {
    let text = r#"{"basis":"collocation","nodes":2,"dim":2,"gap":[[1,0]],"lambda0":[[1,0]],
        "outer":{"kind":"circle","radius":1},"inner":{"kind":"cardioid"},"outer_nodes":2,"inner_nodes":2,
        "bc":{"kind":"dirichlet"}}"#;
    let f = DtnFile::from_json(text).unwrap();
    assert!(matches!(f.operator(), Err(Error::Format(_))));
    let g = DtnFile { basis: "wavelet".into(), ..f };
    assert!(matches!(g.basis(), Err(Error::Format(_))));
}

#[test]
fn indicator_csv_round_trip() {
    let spec = GridSpec { resolution: 9, extent: [-1.0, 1.0, -1.0, 1.0], mask_radius: 0.9 };
    let grid = IndicatorGrid::from_fn(spec, |p: &Point2<f64>| (-(p.coords.norm_squared())).exp() / 3.0);
    let text = write_indicator_csv(&grid, &meta()).unwrap();
    assert!(text.starts_with("# config_hash=abc123\n"));
    assert!(text.contains("\nx,y,W\n"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, grid.values.iter().flatten().count());
    let (back, m) = read_indicator_csv(&text).unwrap();
    assert_eq!(m["config_hash"], "abc123");
    assert_eq!(back, grid);
    assert_eq!(write_indicator_csv(&back, &meta()).unwrap(), text);
}

#[test]
fn indicator_csv_rejects_off_grid_points() {
    let text = "# resolution=3\n# extent=-1,1,-1,1\n# mask_radius=2\nx,y,W\n0.3,0,1\n";
    assert!(matches!(read_indicator_csv(text), Err(Error::Format(_))));
    assert!(matches!(read_indicator_csv("x,y,W\n"), Err(Error::Format(_))));
    let wrong = "# resolution=3\n# extent=-1,1,-1,1\n# mask_radius=2\na,b\n";
    assert!(matches!(read_indicator_csv(wrong), Err(Error::Format(_))));
}

#[test]
fn gamma_csv_marks_masked_nodes() {
    let rec = GammaReconstruction::from_pairs(vec![0.0, 1.0, 2.0], vec![vec![Some(2.0), None, Some(1.0)], vec![Some(3.0), None, None]]).unwrap();
    let text = write_gamma_csv(&rec, &meta()).unwrap();
    assert!(text.contains("theta,gamma_avg,gamma_std,n_pairs_used\n"));
    let (rows, m) = read_gamma_csv(&text).unwrap();
    assert_eq!(m["config_hash"], "abc123");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].average, Some(2.5));
    assert_eq!(rows[0].spread, Some(0.5));
    assert_eq!(rows[0].pairs_used, 2);
    assert_eq!(rows[1].average, None);
    assert_eq!(rows[1].pairs_used, 0);
    assert_eq!(rows[2].average, Some(1.0));
    let json: serde_json::Value = serde_json::from_str(&gamma_pairs_json(&rec).unwrap()).unwrap();
    assert!(json["pairs"][1][1].is_null());
}
