use nalgebra::{DMatrix, DVector};

use super::ellipsoid::{Ellipsoid, EllipsoidPiece};
use super::flat::AffineMap;
use super::sample::SupportSample;
use crate::error::{GeomError, Result};
use crate::sampling::{antipodal_directions, sphere_directions};

/// How a convex body is stored.
///
/// Point clouds, ellipsoids and ellipsoid hulls are closed under affine maps
/// and projections without approximation. Support samples are exact under
/// invertible linear maps and interpolated under projections.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Convex hull of finitely many points.
    PointCloud(Vec<DVector<f64>>),
    /// Samples of the support function.
    SupportSample(SupportSample),
    Ellipsoid(Ellipsoid),
    /// Convex hull of finitely many (possibly flat) ellipsoids.
    EllipsoidHull(Vec<EllipsoidPiece>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    repr: Representation,
    symmetric: bool,
}

/// Touching point for an outer normal plus the spread of the face it lies on.
#[derive(Debug, Clone)]
pub struct Touching {
    pub point: DVector<f64>,
    /// Diameter estimate of the face `argmax <x, u>`; zero for unique
    /// touching points.
    pub spread: f64,
}

fn check_finite<'a>(what: &str, it: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if it.into_iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite(what.into()))
    }
}

fn spans(vectors: &[DVector<f64>], dim: usize) -> bool {
    if vectors.len() < dim {
        return false;
    }
    let m = DMatrix::from_columns(vectors);
    let sv = m.singular_values();
    let max = sv.max();
    max > 0.0 && sv.iter().filter(|s| **s > 1e-10 * max).count() >= dim
}

/// Every point has its negation in the set (to `tol` relative to scale).
fn closed_under_negation(points: &[DVector<f64>], tol: f64) -> bool {
    let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let eps = tol * scale;
    let mut sorted: Vec<&DVector<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let firsts: Vec<f64> = sorted.iter().map(|p| p[0]).collect();
    points.iter().all(|x| {
        let target = -x[0];
        let lo = firsts.partition_point(|v| *v < target - eps);
        sorted[lo..]
            .iter()
            .take_while(|y| y[0] <= target + eps)
            .any(|y| (*y + x).amax() <= eps)
    })
}

impl ConvexBody {
    pub fn point_cloud(points: Vec<DVector<f64>>, symmetric: bool) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(GeomError::DegenerateBody("empty point cloud".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(GeomError::DegenerateBody("zero-dimensional points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            check_finite("point cloud", p.iter())?;
        }
        let diffs: Vec<DVector<f64>> = points.iter().map(|p| p - first).collect();
        if !spans(&diffs, dim) {
            return Err(GeomError::DegenerateBody(
                "points are not affinely spanning".into(),
            ));
        }
        if symmetric && !closed_under_negation(&points, 1e-12) {
            return Err(GeomError::InvalidArgument(
                "point cloud flagged symmetric is not closed under negation".into(),
            ));
        }
        Ok(Self {
            dim,
            repr: Representation::PointCloud(points),
            symmetric,
        })
    }

    /// Point cloud together with the negated points.
    pub fn symmetric_point_cloud(points: Vec<DVector<f64>>) -> Result<Self> {
        let mut all = Vec::with_capacity(2 * points.len());
        for p in points {
            all.push(-&p);
            all.push(p);
        }
        Self::point_cloud(all, true)
    }

    pub fn ellipsoid(e: Ellipsoid) -> Self {
        let scale = e.inverse_shape().amax().sqrt().max(1.0);
        let symmetric = e.center().amax() <= 1e-12 * scale;
        Self {
            dim: e.dim(),
            repr: Representation::Ellipsoid(e),
            symmetric,
        }
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::ellipsoid(Ellipsoid::unit_ball(n))
    }

    pub fn ellipsoid_hull(pieces: Vec<EllipsoidPiece>, symmetric: bool) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(GeomError::DegenerateBody("empty ellipsoid hull".into()));
        };
        let dim = first.dim();
        let mut span = Vec::new();
        for p in &pieces {
            if p.dim() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            check_finite("ellipsoid hull", p.center.iter().chain(p.axes.iter()))?;
            span.push(&p.center - &first.center);
            span.extend(p.axes.column_iter().map(|c| c.into_owned()));
        }
        if !spans(&span, dim) {
            return Err(GeomError::DegenerateBody(
                "ellipsoid hull has empty interior".into(),
            ));
        }
        let body = Self {
            dim,
            repr: Representation::EllipsoidHull(pieces),
            symmetric,
        };
        if symmetric && body.support_asymmetry() > 1e-10 {
            return Err(GeomError::InvalidArgument(
                "ellipsoid hull flagged symmetric is not symmetric".into(),
            ));
        }
        Ok(body)
    }

    pub fn support_sample(sample: SupportSample, symmetric: bool) -> Result<Self> {
        let dim = sample.dim();
        if symmetric {
            if sample.values().iter().any(|h| *h <= 0.0) {
                return Err(GeomError::InvalidArgument(
                    "symmetric support sample must have positive values".into(),
                ));
            }
            // pairs (u, h), (-u, h) must both be present
            let lifted: Vec<DVector<f64>> = sample
                .directions()
                .iter()
                .zip(sample.values())
                .map(|(u, h)| u * *h)
                .collect();
            if !closed_under_negation(&lifted, 1e-12) {
                return Err(GeomError::InvalidArgument(
                    "support sample flagged symmetric is not closed under negation".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            repr: Representation::SupportSample(sample),
            symmetric,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn kind_name(&self) -> &'static str {
        match self.repr {
            Representation::PointCloud(_) => "point-cloud",
            Representation::SupportSample(_) => "support-sample",
            Representation::Ellipsoid(_) => "ellipsoid",
            Representation::EllipsoidHull(_) => "ellipsoid-hull",
        }
    }

    /// Ellipsoid view when the body is exactly an ellipsoid.
    pub fn as_ellipsoid(&self) -> Option<Ellipsoid> {
        match &self.repr {
            Representation::Ellipsoid(e) => Some(e.clone()),
            Representation::EllipsoidHull(pieces) if pieces.len() == 1 => {
                let p = &pieces[0];
                if p.axes.ncols() < self.dim {
                    return None;
                }
                let inv = &p.axes * p.axes.transpose();
                Ellipsoid::from_inverse_shape(p.center.clone(), inv).ok()
            }
            _ => None,
        }
    }

    pub fn support(&self, u: &DVector<f64>) -> f64 {
        match &self.repr {
            Representation::PointCloud(pts) => pts
                .iter()
                .map(|p| p.dot(u))
                .fold(f64::NEG_INFINITY, f64::max),
            Representation::SupportSample(s) => s.support(u),
            Representation::Ellipsoid(e) => e.support(u),
            Representation::EllipsoidHull(pieces) => pieces
                .iter()
                .map(|p| p.support(u))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest `|h(u) - h(-u)|` over a fixed antipodal direction set,
    /// relative to the body's scale.
    fn support_asymmetry(&self) -> f64 {
        let dirs = sphere_directions(self.dim, 64, 0);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1e-300;
        for u in &dirs {
            let a = self.support(u);
            let b = self.support(&-u);
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
        worst / scale
    }

    pub fn touching(&self, u: &DVector<f64>) -> Touching {
        match &self.repr {
            Representation::PointCloud(pts) => {
                let dots: Vec<f64> = pts.iter().map(|p| p.dot(u)).collect();
                let (imax, hmax) = dots
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| {
                        if d > acc.1 {
                            (i, d)
                        } else {
                            acc
                        }
                    });
                let scale = pts.iter().map(|p| p.amax()).fold(1.0, f64::max);
                let band = hmax - 1e-9 * scale;
                let x = &pts[imax];
                let spread = pts
                    .iter()
                    .zip(&dots)
                    .filter(|(_, d)| **d >= band)
                    .map(|(p, _)| (p - x).norm())
                    .fold(0.0, f64::max);
                Touching {
                    point: x.clone(),
                    spread,
                }
            }
            Representation::SupportSample(s) => {
                let f = s.fit(u);
                Touching {
                    point: f.touching_point,
                    spread: f.kink,
                }
            }
            Representation::Ellipsoid(e) => Touching {
                point: e.touching_point(u),
                spread: 0.0,
            },
            Representation::EllipsoidHull(pieces) => {
                let sup: Vec<f64> = pieces.iter().map(|p| p.support(u)).collect();
                let hmax = sup.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let scale = pieces
                    .iter()
                    .map(|p| p.center.amax() + p.radius())
                    .fold(1.0, f64::max);
                let band = hmax - 1e-9 * scale;
                let mut pts = Vec::new();
                let mut spread: f64 = 0.0;
                for (p, h) in pieces.iter().zip(&sup) {
                    if *h < band {
                        continue;
                    }
                    match p.touching_point(u) {
                        Some(x) => pts.push(x),
                        None => {
                            spread = spread.max(2.0 * p.radius());
                            pts.push(p.center.clone());
                        }
                    }
                }
                for a in &pts {
                    for b in &pts {
                        spread = spread.max((a - b).norm());
                    }
                }
                Touching {
                    point: pts.swap_remove(0),
                    spread,
                }
            }
        }
    }

    /// Diameter; exact for ellipsoids and point clouds up to 3000 points,
    /// a sampled lower estimate otherwise.
    pub fn diameter(&self) -> f64 {
        fn max_pairwise(pts: &[DVector<f64>]) -> f64 {
            let mut best: f64 = 0.0;
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    best = best.max((&pts[i] - &pts[j]).norm());
                }
            }
            best
        }
        match &self.repr {
            Representation::PointCloud(pts) if pts.len() <= 3000 => max_pairwise(pts),
            Representation::Ellipsoid(e) => 2.0 * e.principal_axes().0.max(),
            Representation::EllipsoidHull(pieces) => {
                let mut pts = Vec::new();
                for p in pieces {
                    pts.extend(p.sample_points(24, 0));
                }
                let width = self.max_width(400);
                max_pairwise(&pts).max(width)
            }
            _ => self.max_width(1000),
        }
    }

    fn max_width(&self, half: usize) -> f64 {
        antipodal_directions(self.dim, half, 1)
            .chunks(2)
            .map(|c| self.support(&c[0]) + self.support(&c[1]))
            .fold(0.0, f64::max)
    }

    /// Image under the linear map `m` (`k x dim`, full row rank).
    pub fn linear_image(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: m.ncols(),
            });
        }
        let k = m.nrows();
        match &self.repr {
            Representation::PointCloud(pts) => {
                Self::point_cloud(pts.iter().map(|p| m * p).collect(), self.symmetric)
            }
            Representation::Ellipsoid(e) => {
                let inv = m * e.inverse_shape() * m.transpose();
                let img = Ellipsoid::from_inverse_shape(m * e.center(), inv)?;
                let mut body = Self::ellipsoid(img);
                body.symmetric = self.symmetric;
                Ok(body)
            }
            Representation::EllipsoidHull(pieces) => Self::ellipsoid_hull(
                pieces.iter().map(|p| p.mapped(m, None)).collect(),
                self.symmetric,
            ),
            Representation::SupportSample(s) => {
                if k == self.dim {
                    let inv_t = m
                        .clone()
                        .try_inverse()
                        .ok_or_else(|| GeomError::InvalidArgument("singular map".into()))?
                        .transpose();
                    let mut dirs = Vec::with_capacity(s.len());
                    let mut vals = Vec::with_capacity(s.len());
                    for (u, h) in s.directions().iter().zip(s.values()) {
                        let v = &inv_t * u;
                        let n = v.norm();
                        dirs.push(v / n);
                        vals.push(h / n);
                    }
                    Self::support_sample(SupportSample::new(dirs, vals)?, self.symmetric)
                } else {
                    let count = match k {
                        1 => 1,
                        2 => 360,
                        _ => s.len() / 2,
                    };
                    let dirs = if k == 1 {
                        vec![
                            DVector::from_element(1, -1.0),
                            DVector::from_element(1, 1.0),
                        ]
                    } else {
                        antipodal_directions(k, count, 0)
                    };
                    let mt = m.transpose();
                    let mut vals = Vec::with_capacity(dirs.len());
                    for w in &dirs {
                        let v = &mt * w;
                        let n = v.norm();
                        vals.push(n * s.support(&(v / n)));
                    }
                    let mut sample = SupportSample::new(dirs, vals)?;
                    if self.symmetric {
                        // interpolation is not exactly odd; average antipodal pairs
                        let vals: Vec<f64> = sample
                            .values()
                            .chunks(2)
                            .flat_map(|c| {
                                let a = 0.5 * (c[0] + c[1]);
                                [a, a]
                            })
                            .collect();
                        sample = SupportSample::new(sample.directions().to_vec(), vals)?;
                    }
                    Self::support_sample(sample, self.symmetric)
                }
            }
        }
    }

    pub fn translated(&self, t: &DVector<f64>) -> Result<Self> {
        if t.len() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: t.len(),
            });
        }
        let symmetric = self.symmetric && t.iter().all(|x| *x == 0.0);
        Ok(match &self.repr {
            Representation::PointCloud(pts) => Self {
                dim: self.dim,
                repr: Representation::PointCloud(pts.iter().map(|p| p + t).collect()),
                symmetric,
            },
            Representation::Ellipsoid(e) => {
                Self::ellipsoid(Ellipsoid::new(e.center() + t, e.shape().clone())?)
            }
            Representation::EllipsoidHull(pieces) => Self {
                dim: self.dim,
                repr: Representation::EllipsoidHull(
                    pieces
                        .iter()
                        .map(|p| EllipsoidPiece {
                            center: &p.center + t,
                            axes: p.axes.clone(),
                        })
                        .collect(),
                ),
                symmetric,
            },
            Representation::SupportSample(s) => {
                let vals = s
                    .directions()
                    .iter()
                    .zip(s.values())
                    .map(|(u, h)| h + u.dot(t))
                    .collect();
                Self {
                    dim: self.dim,
                    repr: Representation::SupportSample(SupportSample::new(
                        s.directions().to_vec(),
                        vals,
                    )?),
                    symmetric,
                }
            }
        })
    }

    pub fn affine_image(&self, f: &AffineMap) -> Result<Self> {
        if f.dim() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: f.dim(),
            });
        }
        let lin = self.linear_image(&f.matrix)?;
        if f.translation.iter().all(|x| *x == 0.0) {
            Ok(lin)
        } else {
            lin.translated(&f.translation)
        }
    }

    /// Marks the body as symmetric after checking the promise.
    pub fn into_symmetric(self) -> Result<Self> {
        match &self.repr {
            Representation::PointCloud(p) => Self::point_cloud(p.clone(), true),
            Representation::EllipsoidHull(p) => Self::ellipsoid_hull(p.clone(), true),
            Representation::SupportSample(s) => Self::support_sample(s.clone(), true),
            Representation::Ellipsoid(e) => {
                let b = Self::ellipsoid(e.clone());
                if b.symmetric {
                    Ok(b)
                } else {
                    Err(GeomError::InvalidArgument("ellipsoid is not centered".into()))
                }
            }
        }
    }

    /// Drops the symmetry promise (no check needed).
    pub fn without_symmetry(mut self) -> Self {
        self.symmetric = false;
        self
    }

    /// Points of the body whose hull approximates it: the points themselves
    /// for clouds, boundary samples otherwise.
    pub fn boundary_points(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        match &self.repr {
            Representation::PointCloud(pts) => pts.clone(),
            Representation::Ellipsoid(e) => {
                let dirs = if self.symmetric {
                    antipodal_directions(self.dim, count.div_ceil(2), seed)
                } else {
                    sphere_directions(self.dim, count, seed)
                };
                dirs.iter().map(|u| e.touching_point(u)).collect()
            }
            Representation::EllipsoidHull(pieces) => {
                let per = (count / pieces.len()).max(8);
                pieces
                    .iter()
                    .flat_map(|p| p.sample_points(per, seed))
                    .collect()
            }
            Representation::SupportSample(s) => s.touching_points(),
        }
    }

    /// Explicit conversion to a point cloud through `boundary_points`.
    pub fn to_point_cloud(&self, count: usize, seed: u64) -> Result<Self> {
        let pts = self.boundary_points(count, seed);
        let sym = self.symmetric && closed_under_negation(&pts, 1e-12);
        Self::point_cloud(pts, sym)
    }
}
