mod common;

use common::*;
use nalgebra::DMatrix;
use serde_json::json;

use shadowgeom::generate::{gen_body, generate, BodySpec};
use shadowgeom::geometry::{shapes, support_distance, ConvexBody, Ellipsoid, Line};
use shadowgeom::harness::{
    report_csv, scan_csv, scan_json, scan_projection_field, suite_defaults, suite_json, svg_shadow, verify,
    AxisReport, ScanOptions, SuiteConfig, TrialStatus, LEMMA_IDS, MAX_SKIPPED_FRACTION,
};
use shadowgeom::io::{body_json, to_stable_string};
use shadowgeom::revolution::{affine_revolution_axis, revolution_residual};
use shadowgeom::GeomError;

fn spec(v: serde_json::Value) -> BodySpec {
    serde_json::from_value(v).unwrap()
}

fn quick(lemma: &str, trials: usize, plant: bool) -> shadowgeom::harness::SuiteReport {
    let mut cfg = SuiteConfig::new(trials, 1);
    cfg.plant_violation = plant;
    verify(lemma, &cfg).unwrap()
}

#[test]
fn generator_examples() {
    let ball = gen_body(&spec(json!({"kind": "ball", "dim": 3})), 0).unwrap();
    let d = support_distance(&ball, &ConvexBody::unit_ball(3), &spiral_dirs(200)).unwrap();
    assert!(d <= 1e-12);

    let cone = generate(&spec(json!({"kind": "revolution", "dim": 3, "profile": {"shape": "cone"}})), 0).unwrap();
    let axis = cone.axis.expect("planted axis");
    assert!(line_angle(&axis.direction(), &e(3, 2)) <= 1e-12);
    assert!(cone.body.is_symmetric());
    assert!(revolution_residual(&cone.body, &axis).unwrap() <= 1e-10);

    let image = generate(
        &spec(json!({"kind": "affine-image", "inner": {"kind": "revolution", "dim": 3, "profile": {"shape": "cone"}}, "max_cond": 20})),
        7,
    )
    .unwrap();
    let planted = image.axis.expect("planted axis");
    let cert = affine_revolution_axis(&image.body).unwrap().expect("axis");
    assert!(line_angle(&cert.axis.direction(), &planted.direction()) <= 1e-2);
}

#[test]
fn generators_are_deterministic() {
    let s = spec(json!({"kind": "random-symmetric-polytope", "dim": 4, "points": 9}));
    let a = to_stable_string(&body_json(&gen_body(&s, 3).unwrap()));
    let b = to_stable_string(&body_json(&gen_body(&s, 3).unwrap()));
    let c = to_stable_string(&body_json(&gen_body(&s, 4).unwrap()));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn invalid_descriptors_name_the_field() {
    match gen_body(&spec(json!({"kind": "cube", "dim": 0})), 0).unwrap_err() {
        GeomError::InvalidDescriptor { field, .. } => assert_eq!(field, "dim"),
        other => panic!("unexpected {other:?}"),
    }
    let bad = spec(json!({"kind": "affine-image", "inner": {"kind": "ball", "dim": 3}, "matrix": [[1, 0], [0, 1]]}));
    assert!(matches!(gen_body(&bad, 0).unwrap_err(), GeomError::InvalidDescriptor { .. }));
    assert!(serde_json::from_value::<BodySpec>(json!({"kind": "dodecahedron"})).is_err());
}

#[test]
fn ellipsoid_scan_is_trivial() {
    let q = DMatrix::from_diagonal(&v(&[1.0, 2.0, 5.0]));
    let body = ConvexBody::ellipsoid(Ellipsoid::new(v(&[0.0, 0.0, 0.0]), q).unwrap());
    let scan = scan_projection_field(&body, &ScanOptions { count: 5, ..ScanOptions::default() }).unwrap();
    assert_eq!(scan.shadows.len(), 5);
    assert!(scan.max_pairwise() <= 1e-6);
    for s in &scan.shadows {
        assert!(s.is_ellipsoid && s.ellipsoid_residual <= 1e-6);
        assert!(!matches!(s.axis, AxisReport::Axis { .. }));
    }
}

#[test]
fn cube_scan_separates_square_and_hexagon() {
    // reference: the canonical square and canonical hexagon are inscribed in
    // the unit circle; scan their relative rotation and reflection
    let polygon = |k: usize, phase: f64, flip: f64| -> Vec<_> {
        (0..k)
            .map(|i| {
                let t = phase + std::f64::consts::TAU * i as f64 / k as f64;
                v(&[t.cos(), flip * t.sin()])
            })
            .collect()
    };
    let hexagon = polygon(6, 0.0, 1.0);
    let dirs = circle_dirs(1440);
    let mut oracle = f64::INFINITY;
    for flip in [1.0, -1.0] {
        for i in 0..1800 {
            let square = polygon(4, std::f64::consts::TAU * i as f64 / 1800.0, flip);
            let worst = dirs
                .iter()
                .map(|u| (hull_support(&square, u) - hull_support(&hexagon, u)).abs())
                .fold(0.0, f64::max);
            oracle = oracle.min(worst);
        }
    }
    assert!(oracle >= 0.1, "grid oracle {oracle}");

    let opts = ScanOptions {
        directions: Some(vec![e(3, 2), v(&[1.0, 1.0, 1.0]).normalize()]),
        ..ScanOptions::default()
    };
    let scan = scan_projection_field(&shapes::cube(3), &opts).unwrap();
    let p = &scan.pairwise;
    assert_eq!((p.nrows(), p.ncols()), (2, 2));
    assert!(p[(0, 0)] == 0.0 && p[(1, 1)] == 0.0 && p[(0, 1)] == p[(1, 0)]);
    assert!(p[(0, 1)] >= 0.1 && p[(0, 1)] >= oracle - 1e-2, "pairwise {}", p[(0, 1)]);
    assert!(scan.shadows.iter().any(|s| !s.is_ellipsoid && s.ellipsoid_residual >= 0.05));

    let csv = scan_csv(&scan).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn scan_of_an_affine_body_of_revolution_follows_its_axis() {
    let got = generate(
        &spec(json!({"kind": "affine-image", "inner": {"kind": "revolution", "dim": 4, "profile": {"shape": "cone"}}, "max_cond": 10})),
        5,
    )
    .unwrap();
    let axis = got.axis.unwrap().direction();
    let scan = scan_projection_field(&got.body, &ScanOptions { count: 4, seed: 2, ..ScanOptions::default() }).unwrap();
    let mut found_axes = 0;
    for s in &scan.shadows {
        let u = &s.direction;
        let expected = &axis - u * u.dot(&axis);
        match &s.axis {
            AxisReport::Axis { axis: found, normal, .. } => {
                assert!(line_angle(&found.direction(), &expected) <= 1e-2);
                assert!(normal.direction().dot(u).abs() <= 1e-9);
                found_axes += 1;
            }
            AxisReport::Degenerate { .. } => assert!(s.is_ellipsoid),
            other => panic!("expected an axis, got {other:?}"),
        }
    }
    assert!(found_axes >= 1);
    let p = &scan.pairwise;
    assert!((p - p.transpose()).amax() == 0.0);
    assert!((0..p.nrows()).all(|i| p[(i, i)] == 0.0));
}

#[test]
fn suites_pass_on_constructed_instances() {
    for (id, trials) in [
        ("lemma-3.2", 20),
        ("lemma-3.3", 3),
        ("lemma-3.4-planarity", 3),
        ("lemma-3.4-contrapositive", 5),
        ("lemma-3.5", 2),
        ("cor-2.2-consistency", 5),
        ("thm-4-ellipsoid-criterion", 2),
    ] {
        let r = quick(id, trials, false);
        assert!(r.ok(), "{id}: {:?}", r.checks);
        assert_eq!(r.records.len(), trials);
        assert!(r.skipped_fraction() <= MAX_SKIPPED_FRACTION);
        assert!(r.records.iter().all(|t| t.lemma_id == id && t.status != TrialStatus::Fail));
    }
}

#[test]
fn suites_fail_on_planted_violations() {
    for id in LEMMA_IDS {
        let r = quick(id, 2, true);
        assert!(!r.ok(), "{id} accepted a planted violation");
        assert!(r.failed > 0);
    }
}

#[test]
fn suite_arguments_are_checked() {
    assert!(verify("lemma-9.9", &SuiteConfig::new(1, 0)).is_err());
    assert!(verify("lemma-3.2", &SuiteConfig::new(0, 0)).is_err());
    let mut cfg = SuiteConfig::new(1, 0);
    cfg.dim = Some(2);
    assert!(verify("lemma-3.2", &cfg).is_err());
    for id in LEMMA_IDS {
        assert!(suite_defaults(id).is_some());
    }
    assert!(suite_defaults("lemma-9.9").is_none());
}

#[test]
fn records_reproduce_bit_for_bit() {
    let a = quick("lemma-3.2", 10, false);
    let b = quick("lemma-3.2", 10, false);
    let text = |r| to_stable_string(&suite_json(r, false).unwrap());
    assert_eq!(text(&a), text(&b));
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.seed, y.seed);
        assert_eq!(x.residuals, y.residuals);
    }
}

#[test]
fn reports_convert_to_csv() {
    let r = quick("cor-2.2-consistency", 3, false);
    let json = suite_json(&r, false).unwrap();
    assert_eq!(json["schema"], "shadowgeom.verify/1");
    assert!(json["records"][0].get("runtime_secs").is_none());
    assert!(suite_json(&r, true).unwrap()["records"][0].get("runtime_secs").is_some());
    let csv = report_csv(&json).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("lemma_id,trial,seed,status"));

    let scan = scan_projection_field(&shapes::cube(3), &ScanOptions { count: 3, axes: false, ..ScanOptions::default() }).unwrap();
    assert_eq!(report_csv(&scan_json(&scan)).unwrap(), scan_csv(&scan).unwrap());

    let empty = json!({"schema": "shadowgeom.verify/1", "records": []});
    assert_eq!(report_csv(&empty).unwrap_err(), GeomError::NothingToReport);
    assert!(matches!(report_csv(&json!({"schema": "other"})).unwrap_err(), GeomError::Format(_)));
}

#[test]
fn svg_output() {
    let s = svg_shadow(&ConvexBody::unit_ball(2), &[Line::through_origin(&e(2, 0)).unwrap()]).unwrap();
    let polygon = s.lines().find(|l| l.contains("<polygon")).unwrap();
    let points = polygon.split('"').nth(1).unwrap();
    assert_eq!(points.split_whitespace().count(), 256);
    assert_eq!(s.matches("<line").count(), 1);

    let s = svg_shadow(&shapes::cube(2), &[]).unwrap();
    let polygon = s.lines().find(|l| l.contains("<polygon")).unwrap();
    assert_eq!(polygon.split('"').nth(1).unwrap().split_whitespace().count(), 4);

    assert!(svg_shadow(&shapes::cube(3), &[]).is_err());
}
