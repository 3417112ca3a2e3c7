//! Deterministic body generators driven by JSON descriptors.
//!
//! ```json
//! {"kind": "affine-image", "inner": {"kind": "revolution", "dim": 3,
//!   "profile": {"shape": "cone"}}, "max_cond": 20}
//! ```

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::geometry::{AffineMap, ConvexBody, Ellipsoid, EllipsoidPiece, Line, SupportSample};
use crate::linalg::{complement_of_vector, random_conditioned, random_unit};
use crate::sampling::{antipodal_directions, derive_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        dim: usize,
    },
    /// `{x : (x-c)^T Q (x-c) <= 1}` from `shape` (Q) or from semi-axis
    /// lengths along the coordinate axes.
    Ellipsoid {
        #[serde(default)]
        semi_axes: Option<Vec<f64>>,
        #[serde(default)]
        shape: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Cube {
        dim: usize,
    },
    CrossPolytope {
        dim: usize,
    },
    /// Hull of `points` random points and their negations.
    RandomSymmetricPolytope {
        dim: usize,
        points: usize,
    },
    Points {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        symmetric: bool,
    },
    /// Hull of the balls of radius `r(t)` in the hyperplanes orthogonal to
    /// the axis at the profile knots.
    Revolution {
        dim: usize,
        profile: Profile,
        #[serde(default)]
        axis: Option<Vec<f64>>,
    },
    /// `{(y, t) : (|y|/radius)^p + (|t|/half_height)^p <= 1}` in
    /// coordinates (axis⊥, axis), stored as support samples.
    SmoothRevolution {
        dim: usize,
        p: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        half_height: f64,
        #[serde(default)]
        axis: Option<Vec<f64>>,
        #[serde(default)]
        samples: Option<usize>,
    },
    /// Symmetric polytope stacked from random polygonal layers; not a
    /// body of revolution about any axis.
    AsymmetricProfile {
        dim: usize,
        #[serde(default = "default_layers")]
        layers: usize,
    },
    AffineImage {
        inner: Box<BodySpec>,
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        /// Condition-number bound for a random matrix when `matrix` is
        /// absent.
        #[serde(default)]
        max_cond: Option<f64>,
        #[serde(default)]
        translation: Option<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_layers() -> usize {
    3
}

/// Radius profile `r(t)` on `[-1, 1]`, mirrored about `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// Knots `[t, r]` with `0 <= t <= 1`; mirrored to negative `t`.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// `r(t) = 1 - |t|`.
    Cone,
    /// Random concave profile with `knots` interior breakpoints.
    RandomConcave {
        #[serde(default = "default_knots")]
        knots: usize,
    },
    /// Unit ball together with the points `±tip * axis`.
    CappedBall { tip: f64 },
}

fn default_knots() -> usize {
    3
}

/// A generated body together with its planted axis of revolution, if any.
#[derive(Debug, Clone)]
pub struct Generated {
    pub body: ConvexBody,
    pub axis: Option<Line>,
}

fn invalid(field: &str, reason: impl Into<String>) -> GeomError {
    GeomError::InvalidDescriptor {
        field: field.into(),
        reason: reason.into(),
    }
}

fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(invalid("dim", format!("must be at least {min}")));
    }
    if dim > 64 {
        return Err(invalid("dim", "must be at most 64"));
    }
    Ok(())
}

fn vector(field: &str, v: &[f64], dim: Option<usize>) -> Result<DVector<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "non-finite entry"));
    }
    if let Some(d) = dim {
        if v.len() != d {
            return Err(invalid(field, format!("expected length {d}, got {}", v.len())));
        }
    }
    Ok(DVector::from_column_slice(v))
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(field, "must be a nonempty square matrix"));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(field, "non-finite entry"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn axis_or_last(field: &str, axis: &Option<Vec<f64>>, dim: usize) -> Result<DVector<f64>> {
    match axis {
        Some(a) => {
            let v = vector(field, a, Some(dim))?;
            let n = v.norm();
            if !(n > 0.0) {
                return Err(invalid(field, "zero vector"));
            }
            Ok(v / n)
        }
        None => {
            let mut e = DVector::zeros(dim);
            e[dim - 1] = 1.0;
            Ok(e)
        }
    }
}

/// Body for `(spec, seed)`.
pub fn gen_body(spec: &BodySpec, seed: u64) -> Result<ConvexBody> {
    generate(spec, seed).map(|g| g.body)
}

pub fn generate(spec: &BodySpec, seed: u64) -> Result<Generated> {
    let plain = |body: ConvexBody| Generated { body, axis: None };
    match spec {
        BodySpec::Ball { dim } => {
            check_dim(*dim, 1)?;
            Ok(plain(ConvexBody::unit_ball(*dim)))
        }
        BodySpec::Ellipsoid {
            semi_axes,
            shape,
            center,
        } => {
            let q = match (semi_axes, shape) {
                (Some(s), None) => {
                    let s = vector("semi_axes", s, None)?;
                    if s.is_empty() || s.iter().any(|x| *x <= 0.0) {
                        return Err(invalid("semi_axes", "must be positive"));
                    }
                    DMatrix::from_diagonal(&s.map(|x| 1.0 / (x * x)))
                }
                (None, Some(m)) => matrix("shape", m)?,
                _ => return Err(invalid("shape", "give exactly one of shape, semi_axes")),
            };
            let n = q.nrows();
            check_dim(n, 1)?;
            let c = match center {
                Some(c) => vector("center", c, Some(n))?,
                None => DVector::zeros(n),
            };
            let e = Ellipsoid::new(c, q).map_err(|e| invalid("shape", e.to_string()))?;
            Ok(plain(ConvexBody::ellipsoid(e)))
        }
        BodySpec::Cube { dim } => {
            check_dim(*dim, 1)?;
            if *dim > 16 {
                return Err(invalid("dim", "cube vertices limited to dim <= 16"));
            }
            Ok(plain(crate::geometry::shapes::cube(*dim)))
        }
        BodySpec::CrossPolytope { dim } => {
            check_dim(*dim, 1)?;
            Ok(plain(crate::geometry::shapes::cross_polytope(*dim)))
        }
        BodySpec::RandomSymmetricPolytope { dim, points } => {
            check_dim(*dim, 1)?;
            if *points < *dim {
                return Err(invalid("points", format!("need at least dim = {dim} points")));
            }
            let mut rng = derive_rng(seed, 0x5250);
            for _ in 0..100 {
                let pts: Vec<DVector<f64>> = (0..*points)
                    .map(|_| random_unit(&mut rng, *dim) * rng.random_range(0.5..1.0))
                    .collect();
                if let Ok(b) = ConvexBody::symmetric_point_cloud(pts) {
                    return Ok(plain(b));
                }
            }
            Err(invalid("points", "could not draw a full-dimensional polytope"))
        }
        BodySpec::Points { points, symmetric } => {
            let pts = points
                .iter()
                .map(|p| vector("points", p, points.first().map(|f| f.len())))
                .collect::<Result<Vec<_>>>()?;
            ConvexBody::point_cloud(pts, *symmetric)
                .map(plain)
                .map_err(|e| invalid("points", e.to_string()))
        }
        BodySpec::Revolution { dim, profile, axis } => {
            check_dim(*dim, 2)?;
            let a = axis_or_last("axis", axis, *dim)?;
            let body = revolution_body(*dim, profile, &a, seed)?;
            Ok(Generated {
                body,
                axis: Some(Line::through_origin(&a)?),
            })
        }
        BodySpec::SmoothRevolution {
            dim,
            p,
            radius,
            half_height,
            axis,
            samples,
        } => {
            check_dim(*dim, 2)?;
            if !(*p > 1.0 && p.is_finite()) {
                return Err(invalid("p", "must be a finite exponent above 1"));
            }
            if !(*radius > 0.0 && *half_height > 0.0) {
                return Err(invalid("radius", "radius and half_height must be positive"));
            }
            let a = axis_or_last("axis", axis, *dim)?;
            let count = samples.unwrap_or(match dim {
                2 => 720,
                3 => 4000,
                _ => 8000,
            });
            let body = smooth_revolution(*dim, *p, *radius, *half_height, &a, count, seed)?;
            Ok(Generated {
                body,
                axis: Some(Line::through_origin(&a)?),
            })
        }
        BodySpec::AsymmetricProfile { dim, layers } => {
            check_dim(*dim, 2)?;
            if *layers == 0 {
                return Err(invalid("layers", "must be positive"));
            }
            Ok(plain(asymmetric_profile(*dim, *layers, seed)?))
        }
        BodySpec::AffineImage {
            inner,
            matrix: m,
            max_cond,
            translation,
        } => {
            let g = generate(inner, seed)?;
            let n = g.body.dim();
            let a = match m {
                Some(rows) => {
                    let a = matrix("matrix", rows)?;
                    if a.nrows() != n {
                        return Err(invalid("matrix", format!("expected {n}x{n}")));
                    }
                    a
                }
                None => {
                    let k = max_cond.unwrap_or(20.0);
                    if !(k >= 1.0 && k.is_finite()) {
                        return Err(invalid("max_cond", "must be at least 1"));
                    }
                    random_conditioned(&mut derive_rng(seed, 0x4146), n, k)
                }
            };
            let t = match translation {
                Some(t) => vector("translation", t, Some(n))?,
                None => DVector::zeros(n),
            };
            let f = AffineMap::new(a, t).map_err(|e| invalid("matrix", e.to_string()))?;
            let body = g.body.affine_image(&f)?;
            let axis = g.axis.map(|l| f.map_line(&l)).transpose()?;
            Ok(Generated { body, axis })
        }
    }
}

/// Knots `(t, r)` for `t` in `[0, 1]`, increasing in `t`.
fn profile_knots(profile: &Profile, seed: u64) -> Result<Vec<(f64, f64)>> {
    match profile {
        Profile::Cone => Ok(vec![(0.0, 1.0), (1.0, 0.0)]),
        Profile::PiecewiseLinear { knots } => {
            if knots.len() < 2 {
                return Err(invalid("profile.knots", "need at least two knots"));
            }
            let mut k: Vec<(f64, f64)> = knots.iter().map(|p| (p[0], p[1])).collect();
            if k.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
                return Err(invalid("profile.knots", "non-finite entry"));
            }
            k.sort_by(|a, b| a.0.total_cmp(&b.0));
            if k.iter().any(|(t, r)| *t < 0.0 || *t > 1.0 || *r < 0.0) {
                return Err(invalid("profile.knots", "need 0 <= t <= 1 and r >= 0"));
            }
            if k[0].1 <= 0.0 {
                return Err(invalid("profile.knots", "radius at the smallest t must be positive"));
            }
            Ok(k)
        }
        Profile::RandomConcave { knots } => {
            let mut rng = derive_rng(seed, 0x5052);
            let mut ts: Vec<f64> = (0..*knots).map(|_| rng.random_range(0.1..0.9)).collect();
            ts.sort_by(f64::total_cmp);
            ts.insert(0, 0.0);
            ts.push(1.0);
            let mut slopes: Vec<f64> = (1..ts.len()).map(|_| rng.random_range(0.0..1.5)).collect();
            slopes.sort_by(f64::total_cmp);
            // steepening descent keeps the profile concave
            let drop: f64 = slopes.iter().zip(ts.windows(2)).map(|(s, w)| s * (w[1] - w[0])).sum();
            let end = rng.random_range(0.0..0.5);
            let scale = if drop > 1.0 - end { (1.0 - end) / drop } else { 1.0 };
            let mut r = 1.0;
            let mut out = vec![(0.0, 1.0)];
            for (s, w) in slopes.iter().zip(ts.windows(2)) {
                r -= s * scale * (w[1] - w[0]);
                out.push((w[1], r.max(0.0)));
            }
            Ok(out)
        }
        Profile::CappedBall { .. } => unreachable!("handled separately"),
    }
}

fn revolution_body(dim: usize, profile: &Profile, a: &DVector<f64>, seed: u64) -> Result<ConvexBody> {
    let t = complement_of_vector(a);
    if let Profile::CappedBall { tip } = profile {
        if !(*tip >= 1.0 && tip.is_finite()) {
            return Err(invalid("profile.tip", "must be at least 1"));
        }
        let ball = EllipsoidPiece::new(DVector::zeros(dim), DMatrix::identity(dim, dim))?;
        return ConvexBody::ellipsoid_hull(
            vec![
                ball,
                EllipsoidPiece::point(a * *tip),
                EllipsoidPiece::point(a * -*tip),
            ],
            true,
        );
    }
    let knots = profile_knots(profile, seed)?;
    let mut pieces = Vec::new();
    for &(h, r) in &knots {
        let signs: &[f64] = if h == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for s in signs {
            let c = a * (h * s);
            if r == 0.0 {
                pieces.push(EllipsoidPiece::point(c));
            } else {
                pieces.push(EllipsoidPiece::new(c, &t * r)?);
            }
        }
    }
    ConvexBody::ellipsoid_hull(pieces, true).map_err(|e| invalid("profile", e.to_string()))
}

fn smooth_revolution(
    dim: usize,
    p: f64,
    radius: f64,
    half_height: f64,
    a: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<ConvexBody> {
    let q = p / (p - 1.0);
    let h = |u: &DVector<f64>| {
        let along = u.dot(a);
        let across = (u - a * along).norm();
        ((radius * across).powf(q) + (half_height * along.abs()).powf(q)).powf(1.0 / q)
    };
    let dirs = antipodal_directions(dim, count.div_ceil(2).max(dim), seed);
    let sample = SupportSample::from_fn(dirs, h)?;
    ConvexBody::support_sample(sample, true)
}

fn asymmetric_profile(dim: usize, layers: usize, seed: u64) -> Result<ConvexBody> {
    let mut rng = derive_rng(seed, 0x4150);
    let mut pts = Vec::new();
    for k in 0..layers {
        let height = if layers == 1 {
            0.0
        } else {
            k as f64 / (layers - 1) as f64
        };
        let count = rng.random_range(3..7) + dim;
        let radius = rng.random_range(0.5..1.0) * (1.0 - 0.5 * height);
        for _ in 0..count {
            let mut v = random_unit(&mut rng, dim - 1) * radius * rng.random_range(0.6..1.0);
            v = v.insert_row(dim - 1, height);
            pts.push(v);
        }
    }
    ConvexBody::symmetric_point_cloud(pts)
}
