//! Support, projection, oblique projection, section and support distance.

use nalgebra::{DMatrix, DVector};

use super::body::{ConvexBody, Representation};
use super::ellipsoid::Ellipsoid;
use super::flat::{Line, Subspace};
use crate::error::{GeomError, Result};

/// `max_{x in K} <x, u>` for a unit vector `u`.
pub fn support(body: &ConvexBody, u: &DVector<f64>) -> Result<f64> {
    if u.len() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: u.len(),
        });
    }
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(GeomError::InvalidArgument(format!(
            "support direction must be a unit vector (norm {})",
            u.norm()
        )));
    }
    let h = body.support(u);
    if !h.is_finite() {
        return Err(GeomError::DegenerateBody("support is not finite".into()));
    }
    Ok(h)
}

/// Orthogonal shadow of `body` in the linear subspace `target`, expressed in
/// the subspace's basis coordinates.
pub fn project(body: &ConvexBody, target: &Subspace) -> Result<ConvexBody> {
    if target.ambient_dim() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: target.ambient_dim(),
        });
    }
    if !target.is_linear() {
        return Err(GeomError::InvalidSubspace(
            "projection target must be a linear subspace".into(),
        ));
    }
    if target.dim() >= body.dim() {
        return Err(GeomError::ProjectionOntoFullSpace);
    }
    body.linear_image(&target.basis().transpose())
}

/// Shadow along `u` onto `u^⊥`, together with the basis used for `u^⊥`.
pub fn project_along(body: &ConvexBody, u: &DVector<f64>) -> Result<(ConvexBody, Subspace)> {
    let h = Subspace::hyperplane(u)?;
    Ok((project(body, &h)?, h))
}

/// Image of `body` under the projector onto the hyperplane `target` whose
/// kernel is `line`, in `target`'s coordinates. Equivalent to intersecting
/// the cylinder of lines parallel to `line` through the body with `target`.
pub fn oblique_project(body: &ConvexBody, line: &Line, target: &Subspace) -> Result<ConvexBody> {
    let n = body.dim();
    if line.ambient_dim() != n || target.ambient_dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: target.ambient_dim(),
        });
    }
    if !target.is_linear() {
        return Err(GeomError::InvalidSubspace(
            "oblique projection target must be a linear subspace".into(),
        ));
    }
    let normal = target.normal()?;
    let d = line.direction();
    let c = d.dot(&normal);
    if c.abs() <= 1e-12 {
        return Err(GeomError::DegenerateObliqueDirection);
    }
    let projector = DMatrix::identity(n, n) - &d * normal.transpose() / c;
    body.linear_image(&(target.basis().transpose() * projector))
}

/// Result of intersecting a body with an affine hyperplane.
#[derive(Debug, Clone)]
pub enum Section {
    Empty,
    /// The hyperplane touches the body in a single point (section coords).
    Point(DVector<f64>),
    /// Nonempty but lower-dimensional inside the hyperplane.
    Flat(Vec<DVector<f64>>),
    Body(ConvexBody),
}

impl Section {
    pub fn tag(&self) -> &'static str {
        match self {
            Section::Empty => "empty",
            Section::Point(_) => "point",
            Section::Flat(_) => "flat",
            Section::Body(_) => "body",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SliceOptions {
    /// Boundary samples used when a non-polytope body is sectioned through
    /// its point-cloud approximation.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SliceOptions {
    fn default() -> Self {
        Self {
            samples: 256,
            seed: 0,
        }
    }
}

/// `body ∩ plane` in the plane's coordinates. Exact for ellipsoids and point
/// clouds; other representations are sectioned through a point-cloud
/// approximation with `opts.samples` boundary samples.
pub fn slice(body: &ConvexBody, plane: &Subspace, opts: SliceOptions) -> Result<Section> {
    let n = body.dim();
    if plane.ambient_dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: plane.ambient_dim(),
        });
    }
    if plane.dim() + 1 != n {
        return Err(GeomError::InvalidSubspace(
            "section requires an affine hyperplane".into(),
        ));
    }
    if let Some(e) = body.as_ellipsoid() {
        return Ok(slice_ellipsoid(&e, plane));
    }
    let central = plane.base_point().dot(&plane.normal()?) == 0.0;
    match body.representation() {
        Representation::PointCloud(pts) => Ok(slice_points(pts, plane, body.is_symmetric() && central)),
        _ => {
            let pts = body.boundary_points(opts.samples, opts.seed);
            Ok(slice_points(&pts, plane, body.is_symmetric() && central))
        }
    }
}

fn slice_ellipsoid(e: &Ellipsoid, plane: &Subspace) -> Section {
    let b = plane.basis();
    let q = e.shape();
    let off = plane.base_point() - e.center();
    let qr = b.transpose() * q * b;
    let lin = b.transpose() * (q * &off);
    let Some(qr_inv) = qr.clone().try_inverse() else {
        return Section::Empty;
    };
    let y0 = -(&qr_inv * &lin);
    let rho = 1.0 - off.dot(&(q * &off)) + y0.dot(&(&qr * &y0));
    let tol = 1e-12 * (1.0 + off.dot(&(q * &off)));
    if rho < -tol {
        Section::Empty
    } else if rho <= tol {
        Section::Point(y0)
    } else {
        match Ellipsoid::new(y0.clone(), qr / rho) {
            Ok(s) => Section::Body(ConvexBody::ellipsoid(s)),
            Err(_) => Section::Point(y0),
        }
    }
}

// conv(P) ∩ plane is the hull of the plane's crossings with all segments
// between points of P on opposite sides.
fn slice_points(pts: &[DVector<f64>], plane: &Subspace, symmetric: bool) -> Section {
    let normal = plane.orthogonal().basis().column(0).into_owned();
    let scale = pts.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let eps = 1e-12 * scale;
    let base = plane.base_point();
    let s: Vec<f64> = pts.iter().map(|p| (p - base).dot(&normal)).collect();
    let mut out = Vec::new();
    for (p, si) in pts.iter().zip(&s) {
        if si.abs() <= eps {
            out.push(plane.coords(p));
        }
    }
    for i in 0..pts.len() {
        if s[i] <= eps {
            continue;
        }
        for j in 0..pts.len() {
            if s[j] >= -eps {
                continue;
            }
            let t = s[i] / (s[i] - s[j]);
            let x = &pts[i] + (&pts[j] - &pts[i]) * t;
            out.push(plane.coords(&x));
        }
    }
    if out.is_empty() {
        return Section::Empty;
    }
    let first = out[0].clone();
    let extent = out.iter().map(|p| (p - &first).amax()).fold(0.0, f64::max);
    if extent <= eps {
        return Section::Point(first);
    }
    match ConvexBody::point_cloud(out.clone(), symmetric)
        .or_else(|_| ConvexBody::point_cloud(out.clone(), false))
    {
        Ok(b) => Section::Body(b),
        Err(_) => Section::Flat(out),
    }
}

/// `max_u |h_1(u) - h_2(u)|` over the given unit directions.
pub fn support_distance(a: &ConvexBody, b: &ConvexBody, dirs: &[DVector<f64>]) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if dirs.is_empty() {
        return Err(GeomError::InvalidArgument("empty direction set".into()));
    }
    let mut worst: f64 = 0.0;
    for u in dirs {
        if u.len() != a.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: a.dim(),
                got: u.len(),
            });
        }
        worst = worst.max((a.support(u) - b.support(u)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn projection_onto_full_space_fails() {
        let s = Subspace::coordinate(3, &[0, 1, 2]).unwrap();
        assert_eq!(
            project(&ConvexBody::unit_ball(3), &s),
            Err(GeomError::ProjectionOntoFullSpace)
        );
    }

    #[test]
    fn oblique_direction_inside_target_fails() {
        let h = Subspace::coordinate(3, &[0, 1]).unwrap();
        let l = Line::through_origin(&DVector::from_vec(vec![1.0, 1.0, 0.0])).unwrap();
        assert!(matches!(
            oblique_project(&shapes::cube(3), &l, &h),
            Err(GeomError::DegenerateObliqueDirection)
        ));
    }

    #[test]
    fn ball_sections() {
        let ball = ConvexBody::unit_ball(3);
        let e3 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let mid = Subspace::hyperplane(&e3).unwrap();
        match slice(&ball, &mid, SliceOptions::default()).unwrap() {
            Section::Body(b) => {
                let e = b.as_ellipsoid().unwrap();
                assert!((e.shape() - DMatrix::identity(2, 2)).amax() < 1e-14);
            }
            other => panic!("unexpected {}", other.tag()),
        }
        let top = Subspace::affine_hyperplane(&e3, e3.clone()).unwrap();
        match slice(&ball, &top, SliceOptions::default()).unwrap() {
            Section::Point(p) => assert!(p.norm() < 1e-12),
            other => panic!("unexpected {}", other.tag()),
        }
        let miss = Subspace::affine_hyperplane(&e3, &e3 * 1.5).unwrap();
        assert_eq!(slice(&ball, &miss, SliceOptions::default()).unwrap().tag(), "empty");
    }

    #[test]
    fn support_distance_dimension_mismatch() {
        let dirs = vec![DVector::from_vec(vec![1.0, 0.0])];
        assert!(support_distance(&ConvexBody::unit_ball(2), &ConvexBody::unit_ball(3), &dirs).is_err());
    }

    #[test]
    fn support_rejects_non_unit_direction() {
        let u = DVector::from_vec(vec![1.0, 1.0]);
        assert!(support(&ConvexBody::unit_ball(2), &u).is_err());
    }
}
