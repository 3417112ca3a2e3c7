use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DVector;
use serde_json::{json, Map, Value};

use super::scan::{AxisReport, ScanReport};
use super::{SuiteReport, TrialRecord};
use crate::error::{GeomError, Result};
use crate::geometry::{ConvexBody, Line, Representation};
use crate::io::{affine_map_json, ellipsoid_json, line_json, matrix_json, vector_json};

fn record_json(r: &TrialRecord, timings: bool) -> Value {
    let mut obj = Map::new();
    obj.insert("lemma_id".into(), json!(r.lemma_id));
    obj.insert("trial".into(), json!(r.trial));
    obj.insert("seed".into(), json!(r.seed));
    obj.insert("status".into(), json!(r.status.as_str()));
    obj.insert("attempts".into(), json!(r.attempts));
    obj.insert("note".into(), r.note.as_ref().map_or(Value::Null, |n| json!(n)));
    obj.insert("params".into(), Value::Object(r.params.clone().into_iter().collect()));
    obj.insert(
        "residuals".into(),
        Value::Object(r.residuals.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
    );
    if timings {
        obj.insert("runtime_secs".into(), json!(r.runtime_secs));
    }
    Value::Object(obj)
}

/// Report of a `verify` run. Runtimes are left out unless `timings`, so
/// that equal seeds give equal bytes.
pub fn suite_json(report: &SuiteReport, timings: bool) -> Result<Value> {
    if report.records.is_empty() {
        return Err(GeomError::NothingToReport);
    }
    let keys: BTreeSet<&String> = report.records.iter().flat_map(|r| r.residuals.keys()).collect();
    let mut max = Map::new();
    for k in keys {
        if let Some(v) = report.max_residual(k) {
            max.insert(k.clone(), json!(v));
        }
    }
    Ok(json!({
        "schema": "shadowgeom.verify/1",
        "lemma_id": report.lemma_id,
        "config": {
            "trials": report.config.trials,
            "dim": report.config.dim,
            "seed": report.config.seed,
            "dirs": report.config.dirs,
            "plant_violation": report.config.plant_violation,
        },
        "thresholds": Value::Object(report.thresholds.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
        "summary": {
            "ok": report.ok(),
            "passed": report.passed,
            "failed": report.failed,
            "skipped": report.skipped,
            "skipped_fraction": report.skipped_fraction(),
            "max_residuals": Value::Object(max),
        },
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "passed": c.passed,
            "value": c.value,
            "threshold": c.threshold,
        })).collect::<Vec<_>>(),
        "records": report.records.iter().map(|r| record_json(r, timings)).collect::<Vec<_>>(),
    }))
}

fn axis_json(a: &AxisReport) -> Value {
    match a {
        AxisReport::NotComputed => json!({"status": "not-computed"}),
        AxisReport::Degenerate { residual } => json!({"status": "degenerate", "residual": residual}),
        AxisReport::NotRevolution => json!({"status": "none"}),
        AxisReport::Axis {
            axis,
            normal,
            residual,
            second_best,
        } => json!({
            "status": "axis",
            "axis": line_json(axis),
            "normal": line_json(normal),
            "residual": residual,
            "second_best": second_best,
        }),
    }
}

pub fn scan_json(scan: &ScanReport) -> Value {
    let shadows: Vec<Value> = scan
        .shadows
        .iter()
        .map(|s| {
            json!({
                "direction": vector_json(&s.direction),
                "plane_basis": matrix_json(&s.plane.basis().transpose()),
                "ellipsoid": ellipsoid_json(&s.ellipsoid),
                "beta": affine_map_json(&s.beta),
                "canonical_shadow_digest": s.canonical_digest,
                "ellipsoid_residual": s.ellipsoid_residual,
                "is_ellipsoid": s.is_ellipsoid,
                "axis": axis_json(&s.axis),
            })
        })
        .collect();
    json!({
        "schema": "shadowgeom.scan/1",
        "body_id": scan.body_id,
        "dim": scan.dim,
        "tol": scan.tol,
        "shadows": shadows,
        "pairwise_residuals": matrix_json(&scan.pairwise),
        "summary": {
            "all_ellipsoids": scan.shadows.iter().all(|s| s.is_ellipsoid),
            "max_ellipsoid_residual": scan.max_ellipsoid_residual(),
            "max_pairwise_residual": scan.max_pairwise(),
        },
    })
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> GeomError {
    GeomError::Io(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| GeomError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| GeomError::Format(e.to_string()))
}

fn csv_cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) if n.is_f64() => csv_float(n.as_f64().unwrap_or(f64::NAN)),
        Some(other) => other.to_string(),
    }
}

fn report_field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| GeomError::Format(format!("report has no `{key}`")))
}

/// Converts a `verify` or `scan` JSON report to CSV: one row per trial for
/// suite reports, the pairwise residual matrix for scans.
pub fn report_csv(v: &Value) -> Result<String> {
    match report_field(v, "schema")?.as_str() {
        Some("shadowgeom.verify/1") => records_csv(report_field(v, "records")?),
        Some("shadowgeom.scan/1") => matrix_csv(report_field(v, "pairwise_residuals")?),
        other => Err(GeomError::Format(format!(
            "unknown report schema {}",
            other.unwrap_or("(not a string)")
        ))),
    }
}

fn records_csv(records: &Value) -> Result<String> {
    let records = records
        .as_array()
        .ok_or_else(|| GeomError::Format("`records` must be an array".into()))?;
    if records.is_empty() {
        return Err(GeomError::NothingToReport);
    }
    let keys: BTreeSet<&String> = records
        .iter()
        .filter_map(|r| r.get("residuals").and_then(Value::as_object))
        .flat_map(|m| m.keys())
        .collect();
    let timings = records.iter().any(|r| r.get("runtime_secs").is_some());
    let fixed = ["lemma_id", "trial", "seed", "status", "attempts", "note"];
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = fixed.to_vec();
    header.extend(keys.iter().map(|k| k.as_str()));
    if timings {
        header.push("runtime_secs");
    }
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        let mut row: Vec<String> = fixed.iter().map(|k| csv_cell(r.get(*k))).collect();
        row.extend(
            keys.iter()
                .map(|k| csv_cell(r.get("residuals").and_then(|m| m.get(k.as_str())))),
        );
        if timings {
            row.push(csv_cell(r.get("runtime_secs")));
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    finish_csv(w)
}

fn matrix_csv(rows: &Value) -> Result<String> {
    let rows = rows
        .as_array()
        .ok_or_else(|| GeomError::Format("`pairwise_residuals` must be an array".into()))?;
    if rows.is_empty() {
        return Err(GeomError::NothingToReport);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["shadow".to_string()];
    header.extend((0..rows.len()).map(|j| j.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| GeomError::Format("matrix rows must be arrays".into()))?;
        let mut out = vec![i.to_string()];
        out.extend(cells.iter().map(|c| csv_float(c.as_f64().unwrap_or(f64::NAN))));
        w.write_record(&out).map_err(csv_error)?;
    }
    finish_csv(w)
}

/// One row per trial, one column per residual name (empty when absent).
pub fn suite_csv(report: &SuiteReport, timings: bool) -> Result<String> {
    report_csv(&suite_json(report, timings)?)
}

/// The `m x m` pairwise residual matrix, with a header row of indices.
pub fn scan_csv(scan: &ScanReport) -> Result<String> {
    report_csv(&scan_json(scan))
}

/// Counter-clockwise hull of planar points (monotone chain).
fn hull_2d(points: &[DVector<f64>]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = points.iter().map(|v| (v[0], v[1])).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

const SVG_SIZE: f64 = 512.0;
const POLYGON_SIDES: usize = 256;

/// Hull polygon of a planar body, with optional axes drawn as chords.
/// Bodies other than point clouds are drawn as 256-gons through their
/// touching points.
pub fn svg_shadow(body: &ConvexBody, axes: &[Line]) -> Result<String> {
    if body.dim() != 2 {
        return Err(GeomError::InvalidArgument(format!(
            "svg output needs a planar body, got dimension {}",
            body.dim()
        )));
    }
    let outline = match body.representation() {
        Representation::PointCloud(pts) => hull_2d(pts),
        _ => (0..POLYGON_SIDES)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / POLYGON_SIDES as f64;
                let p = body.touching(&DVector::from_vec(vec![t.cos(), t.sin()])).point;
                (p[0], p[1])
            })
            .collect(),
    };
    let reach = outline
        .iter()
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(0.0, f64::max)
        .max(1e-12);
    let scale = 0.45 * SVG_SIZE / reach;
    let half = SVG_SIZE / 2.0;
    let map = |x: f64, y: f64| (half + scale * x, half - scale * y);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">",
        s = SVG_SIZE
    );
    let pts: Vec<String> = outline
        .iter()
        .map(|&(x, y)| {
            let (a, b) = map(x, y);
            format!("{a:.4},{b:.4}")
        })
        .collect();
    let _ = writeln!(
        out,
        "  <polygon points=\"{}\" fill=\"#dde6f0\" stroke=\"#1f3b5a\" stroke-width=\"1.5\"/>",
        pts.join(" ")
    );
    for l in axes {
        if l.ambient_dim() != 2 {
            return Err(GeomError::DimensionMismatch {
                expected: 2,
                got: l.ambient_dim(),
            });
        }
        let d = l.direction();
        let p = l.normalized_base();
        let (x1, y1) = map(p[0] - 1.2 * reach * d[0], p[1] - 1.2 * reach * d[1]);
        let (x2, y2) = map(p[0] + 1.2 * reach * d[0], p[1] + 1.2 * reach * d[1]);
        let _ = writeln!(
            out,
            "  <line x1=\"{x1:.4}\" y1=\"{y1:.4}\" x2=\"{x2:.4}\" y2=\"{y2:.4}\" stroke=\"#b03a2e\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>"
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
