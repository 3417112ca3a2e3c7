//! JSON formats for bodies, ellipsoids, maps and certificates, and the
//! bit-stable writer used for every report.
//!
//! Body files look like
//!
//! ```json
//! {"type": "point-cloud", "dim": 2, "symmetric": true,
//!  "points": [[1, 0], [-1, 0], [0, 1], [0, -1]]}
//! ```
//!
//! with payload `points` (point-cloud), `directions` + `values`
//! (support-sample), `center` + `shape` (ellipsoid) or `pieces`, a list of
//! `{"center": [...], "axes": [[...]]}` with `axes` a `dim x k` row list
//! (ellipsoid-hull). Readers reject non-finite numbers.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::equivalence::EquivalenceVerdict;
use crate::error::{GeomError, Result};
use crate::fit::MveeResult;
use crate::geometry::{
    AffineMap, ConvexBody, Ellipsoid, EllipsoidPiece, Line, Representation, Subspace,
    SupportSample,
};
use crate::revolution::RevolutionCertificate;

fn format_err(msg: impl Into<String>) -> GeomError {
    GeomError::Format(msg.into())
}

pub fn vector_json(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|x| json!(x)).collect())
}

/// Row list.
pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|x| json!(x)).collect()))
            .collect(),
    )
}

fn number(v: &Value, what: &str) -> Result<f64> {
    let x = v
        .as_f64()
        .ok_or_else(|| format_err(format!("{what}: expected a number")))?;
    if !x.is_finite() {
        return Err(GeomError::NonFinite(what.into()));
    }
    Ok(x)
}

pub fn vector_from_json(v: &Value, what: &str) -> Result<DVector<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| format_err(format!("{what}: expected an array")))?;
    let xs = arr
        .iter()
        .map(|x| number(x, what))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(xs))
}

/// Row list with `cols` columns (any count when `None`).
pub fn matrix_from_json(v: &Value, what: &str, cols: Option<usize>) -> Result<DMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| format_err(format!("{what}: expected an array of rows")))?;
    let rows = rows
        .iter()
        .map(|r| vector_from_json(r, what))
        .collect::<Result<Vec<_>>>()?;
    let ncols = cols.or_else(|| rows.first().map(|r| r.len())).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format_err(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| format_err(format!("missing field `{key}`")))
}

fn vectors_from_json(v: &Value, what: &str, dim: usize) -> Result<Vec<DVector<f64>>> {
    let arr = v
        .as_array()
        .ok_or_else(|| format_err(format!("{what}: expected an array")))?;
    arr.iter()
        .map(|x| {
            let p = vector_from_json(x, what)?;
            if p.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            Ok(p)
        })
        .collect()
}

pub fn ellipsoid_json(e: &Ellipsoid) -> Value {
    json!({"center": vector_json(e.center()), "shape": matrix_json(e.shape())})
}

pub fn ellipsoid_from_json(v: &Value) -> Result<Ellipsoid> {
    let center = vector_from_json(field(v, "center")?, "center")?;
    let shape = matrix_from_json(field(v, "shape")?, "shape", Some(center.len()))?;
    if shape.nrows() != center.len() {
        return Err(GeomError::DimensionMismatch {
            expected: center.len(),
            got: shape.nrows(),
        });
    }
    Ellipsoid::new(center, shape)
}

pub fn affine_map_json(f: &AffineMap) -> Value {
    json!({"matrix": matrix_json(&f.matrix), "translation": vector_json(&f.translation)})
}

pub fn affine_map_from_json(v: &Value) -> Result<AffineMap> {
    let t = vector_from_json(field(v, "translation")?, "translation")?;
    let m = matrix_from_json(field(v, "matrix")?, "matrix", Some(t.len()))?;
    if m.nrows() != t.len() {
        return Err(GeomError::DimensionMismatch {
            expected: t.len(),
            got: m.nrows(),
        });
    }
    AffineMap::new(m, t)
}

pub fn line_json(l: &Line) -> Value {
    json!({"direction": vector_json(&l.direction()), "point": vector_json(&l.normalized_base())})
}

pub fn subspace_json(s: &Subspace) -> Value {
    json!({
        "basis": matrix_json(&s.basis().transpose()),
        "base_point": vector_json(s.base_point()),
    })
}

pub fn body_json(body: &ConvexBody) -> Value {
    let mut obj = Map::new();
    obj.insert("type".into(), json!(body.kind_name()));
    obj.insert("dim".into(), json!(body.dim()));
    obj.insert("symmetric".into(), json!(body.is_symmetric()));
    match body.representation() {
        Representation::PointCloud(pts) => {
            obj.insert(
                "points".into(),
                Value::Array(pts.iter().map(vector_json).collect()),
            );
        }
        Representation::SupportSample(s) => {
            obj.insert(
                "directions".into(),
                Value::Array(s.directions().iter().map(vector_json).collect()),
            );
            obj.insert("values".into(), json!(s.values()));
        }
        Representation::Ellipsoid(e) => {
            obj.insert("center".into(), vector_json(e.center()));
            obj.insert("shape".into(), matrix_json(e.shape()));
        }
        Representation::EllipsoidHull(pieces) => {
            let list = pieces
                .iter()
                .map(|p| json!({"center": vector_json(&p.center), "axes": matrix_json(&p.axes)}))
                .collect();
            obj.insert("pieces".into(), Value::Array(list));
        }
    }
    Value::Object(obj)
}

pub fn body_from_json(v: &Value) -> Result<ConvexBody> {
    let kind = field(v, "type")?
        .as_str()
        .ok_or_else(|| format_err("`type` must be a string"))?;
    let dim = field(v, "dim")?
        .as_u64()
        .ok_or_else(|| format_err("`dim` must be a non-negative integer"))? as usize;
    if dim == 0 {
        return Err(format_err("`dim` must be positive"));
    }
    let symmetric = match v.get("symmetric") {
        None => false,
        Some(s) => s
            .as_bool()
            .ok_or_else(|| format_err("`symmetric` must be a boolean"))?,
    };
    let body = match kind {
        "point-cloud" => {
            let pts = vectors_from_json(field(v, "points")?, "points", dim)?;
            ConvexBody::point_cloud(pts, symmetric)?
        }
        "support-sample" => {
            let dirs = vectors_from_json(field(v, "directions")?, "directions", dim)?;
            let values = vector_from_json(field(v, "values")?, "values")?;
            let sample = SupportSample::new(dirs, values.iter().copied().collect())?;
            ConvexBody::support_sample(sample, symmetric)?
        }
        "ellipsoid" => {
            let e = ellipsoid_from_json(v)?;
            if e.dim() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let b = ConvexBody::ellipsoid(e);
            if symmetric && !b.is_symmetric() {
                return Err(GeomError::InvalidArgument(
                    "ellipsoid flagged symmetric is not centered at the origin".into(),
                ));
            }
            if symmetric {
                b
            } else {
                b.without_symmetry()
            }
        }
        "ellipsoid-hull" => {
            let list = field(v, "pieces")?
                .as_array()
                .ok_or_else(|| format_err("`pieces` must be an array"))?;
            let pieces = list
                .iter()
                .map(|p| {
                    let c = vector_from_json(field(p, "center")?, "center")?;
                    if c.len() != dim {
                        return Err(GeomError::DimensionMismatch {
                            expected: dim,
                            got: c.len(),
                        });
                    }
                    let rows = field(p, "axes")?
                        .as_array()
                        .ok_or_else(|| format_err("`axes` must be an array"))?;
                    let axes = if rows.iter().all(|r| r.as_array().is_some_and(|a| a.is_empty())) {
                        DMatrix::zeros(dim, 0)
                    } else {
                        matrix_from_json(field(p, "axes")?, "axes", None)?
                    };
                    EllipsoidPiece::new(c, axes)
                })
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::ellipsoid_hull(pieces, symmetric)?
        }
        other => return Err(format_err(format!("unknown body type `{other}`"))),
    };
    if body.dim() != dim {
        return Err(GeomError::DimensionMismatch {
            expected: dim,
            got: body.dim(),
        });
    }
    Ok(body)
}

pub fn mvee_json(r: &MveeResult) -> Value {
    json!({
        "ellipsoid": ellipsoid_json(&r.ellipsoid),
        "dual_gap": r.dual_gap,
        "iterations": r.iterations,
        "ill_conditioned": r.ill_conditioned,
    })
}

pub fn verdict_json(v: &EquivalenceVerdict) -> Value {
    json!({
        "equivalent": v.equivalent,
        "residual": v.residual,
        "witness": affine_map_json(&v.witness),
        "restarts_used": v.restarts_used,
    })
}

pub fn certificate_json(c: &RevolutionCertificate) -> Value {
    json!({
        "axis": vector_json(&c.axis.direction()),
        "axis_point": vector_json(&c.axis.normalized_base()),
        "residual": c.residual,
        "degenerate": c.degenerate,
        "second_best": c.second_best,
        "hyperplane_basis": matrix_json(&c.hyperplane.basis().transpose()),
    })
}

/// Serialized with sorted keys, two-space indentation and floats as
/// `{:.16e}` (17 significant digits), so equal values give equal bytes.
pub fn to_stable_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if flat {
                    if i > 0 {
                        out.push(' ');
                    }
                } else {
                    newline(out, indent + 1);
                }
                write_value(out, item, indent + 1);
            }
            if !flat {
                newline(out, indent);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
            }
            newline(out, indent);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

pub fn read_body(path: &Path) -> Result<ConvexBody> {
    body_from_json(&read_json(path)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_text(path, &to_stable_string(v))
}
