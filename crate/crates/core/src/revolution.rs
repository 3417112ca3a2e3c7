//! Bodies of revolution: rotational residuals, axis search, the axis of a
//! projected ball, projections of bodies of revolution and shadow
//! boundaries.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::fit::{body_mvee, canonicalize, is_ellipsoid, normalizing_map};
use crate::geometry::{project_along, AffineMap, ConvexBody, Line, Subspace};
use crate::linalg::{complement_of_vector, line_angle, sym_eigen_sorted};
use crate::optim::nelder_mead;
use crate::sampling::{projective_directions, sphere_directions};

pub const DEFAULT_TOL: f64 = 1e-3;
/// Lines closer than this are treated as parallel.
pub const PARALLEL_ANGLE: f64 = 1e-6;
const SEPARATION: f64 = 0.25;

/// Sampling density of the rotational residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSampling {
    pub directions: usize,
    /// Rotated copies per direction.
    pub orbit: usize,
    pub seed: u64,
}

impl OrbitSampling {
    pub const COARSE: Self = Self {
        directions: 32,
        orbit: 6,
        seed: 0,
    };
    pub const FINE: Self = Self {
        directions: 64,
        orbit: 8,
        seed: 0,
    };
}

impl Default for OrbitSampling {
    fn default() -> Self {
        Self::FINE
    }
}

/// How far `h_K` is from invariance under rotations fixing the line `a`:
/// the largest range of `h_K(u) - <p, u>` over rotated copies of sampled
/// directions (`p` the base point of `a`), divided by the diameter.
pub fn revolution_residual(body: &ConvexBody, axis: &Line) -> Result<f64> {
    revolution_residual_with(body, axis, OrbitSampling::default())
}

pub fn revolution_residual_with(body: &ConvexBody, axis: &Line, s: OrbitSampling) -> Result<f64> {
    if axis.ambient_dim() != body.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: body.dim(),
            got: axis.ambient_dim(),
        });
    }
    let diam = body.diameter();
    if !(diam > 0.0) {
        return Err(GeomError::DegenerateBody("zero diameter".into()));
    }
    Ok(orbit_range(body, &axis.direction(), axis.base_point(), &s) / diam)
}

fn orbit_range(body: &ConvexBody, d: &DVector<f64>, p: &DVector<f64>, s: &OrbitSampling) -> f64 {
    let n = body.dim();
    let t = complement_of_vector(d);
    let value = |u: &DVector<f64>| body.support(u) - p.dot(u);
    let dirs = sphere_directions(n, s.directions, s.seed);
    let circle = if n >= 2 {
        sphere_directions(n - 1, s.orbit, s.seed.wrapping_add(1))
    } else {
        Vec::new()
    };
    let mut worst: f64 = 0.0;
    for u in &dirs {
        let alpha = u.dot(d);
        let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
        let h0 = value(u);
        let (mut lo, mut hi) = (h0, h0);
        for w in &circle {
            let v = d * alpha + &t * w * beta;
            let h = value(&v);
            lo = lo.min(h);
            hi = hi.max(h);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionCertificate {
    pub axis: Line,
    pub residual: f64,
    /// Several well-separated axes fit about as well as the best one.
    pub degenerate: bool,
    /// Best residual among axes at least 0.25 rad from `axis`.
    pub second_best: f64,
    /// Hyperplane of revolution.
    pub hyperplane: Subspace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSearch {
    pub tol: f64,
    pub grid: usize,
    /// Grid minima refined by local search.
    pub refine: usize,
    pub seed: u64,
}

impl Default for AxisSearch {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            grid: 2000,
            refine: 8,
            seed: 0,
        }
    }
}

/// Axis through the origin minimizing the rotational residual, or `None`
/// when even the best axis has residual above the tolerance.
pub fn revolution_axis(body: &ConvexBody) -> Result<Option<RevolutionCertificate>> {
    revolution_axis_with(body, &AxisSearch::default())
}

pub fn revolution_axis_with(body: &ConvexBody, opts: &AxisSearch) -> Result<Option<RevolutionCertificate>> {
    let n = body.dim();
    if n < 2 {
        return Err(GeomError::InvalidArgument(
            "axis search needs dimension at least 2".into(),
        ));
    }
    let diam = body.diameter();
    if !(diam > 0.0) {
        return Err(GeomError::DegenerateBody("zero diameter".into()));
    }
    let origin = DVector::zeros(n);
    let coarse = |d: &DVector<f64>| orbit_range(body, d, &origin, &OrbitSampling::COARSE) / diam;
    let fine = |d: &DVector<f64>| orbit_range(body, d, &origin, &OrbitSampling::FINE) / diam;

    let grid = projective_directions(n, opts.grid, opts.seed);
    let grid_vals: Vec<f64> = grid.par_iter().map(coarse).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| grid_vals[i].total_cmp(&grid_vals[j]).then(i.cmp(&j)));
    let mut seeds: Vec<usize> = Vec::new();
    for &i in &order {
        if seeds.len() >= opts.refine.max(1) {
            break;
        }
        if seeds
            .iter()
            .all(|&j| line_angle(&grid[i], &grid[j]) >= SEPARATION)
        {
            seeds.push(i);
        }
    }
    let mut starts: Vec<DVector<f64>> = seeds.iter().map(|&i| grid[i].clone()).collect();
    starts.extend(moment_axes(body, opts.seed));
    let refined: Vec<(DVector<f64>, f64)> = starts
        .par_iter()
        .map(|d| refine_axis(d, &coarse))
        .collect();
    let (best_i, _) = refined
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, r)| if r.1 < acc.1 { (i, r.1) } else { acc });
    let (axis_dir, best) = refine_axis(&refined[best_i].0, &fine);
    let second = refined
        .iter()
        .map(|(d, v)| (d, *v))
        .chain(grid.iter().zip(grid_vals.iter().copied()))
        .filter(|(d, _)| line_angle(d, &axis_dir) >= SEPARATION)
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    if best > opts.tol {
        return Ok(None);
    }
    let degenerate = second <= (2.0 * best).max(best + 0.5 * opts.tol);
    let axis = Line::through_origin(&axis_dir)?;
    Ok(Some(RevolutionCertificate {
        hyperplane: Subspace::hyperplane(&axis.direction())?,
        axis,
        residual: best,
        degenerate,
        second_best: second,
    }))
}

/// Eigenvectors of `sum (h(u) - mean h) (u u^T - I/n)` over sampled
/// directions. The matrix commutes with every rotation preserving the
/// body, so an axis of revolution is among them whenever its eigenvalue is
/// simple.
fn moment_axes(body: &ConvexBody, seed: u64) -> Vec<DVector<f64>> {
    let n = body.dim();
    let dirs = sphere_directions(n, 1000 * n, seed.wrapping_add(2));
    let h: Vec<f64> = dirs.iter().map(|u| body.support(u)).collect();
    let mean = h.iter().sum::<f64>() / h.len() as f64;
    let iso = DMatrix::<f64>::identity(n, n) / n as f64;
    let mut m = DMatrix::zeros(n, n);
    for (u, hu) in dirs.iter().zip(&h) {
        m += (u * u.transpose() - &iso) * (hu - mean);
    }
    let (_, vecs) = sym_eigen_sorted(&m);
    vecs.column_iter().map(|c| c.into_owned()).collect()
}

fn refine_axis(start: &DVector<f64>, f: &(impl Fn(&DVector<f64>) -> f64 + Sync)) -> (DVector<f64>, f64) {
    let mut d = start.clone();
    let mut fd = f(&d);
    let mut step = 0.05;
    for _ in 0..5 {
        let t = complement_of_vector(&d);
        let base = d.clone();
        let point = |x: &[f64]| {
            let v = &base + &t * DVector::from_column_slice(x);
            v.normalize()
        };
        let mut obj = |x: &[f64]| f(&point(x));
        let (x, v, _) = nelder_mead(&mut obj, &vec![0.0; t.ncols()], step, 1e-14, 1e-10, 150 * t.ncols() + 100);
        if v < fd {
            d = point(&x);
            fd = v;
        } else if step < 1e-4 {
            break;
        }
        step *= 0.1;
    }
    (d, fd)
}

/// Axis of an affine body of revolution: the axis of its canonical form,
/// pulled back through the canonicalizing map. The hyperplane of revolution
/// is the preimage of the canonical axis' orthogonal complement.
pub fn affine_revolution_axis(body: &ConvexBody) -> Result<Option<RevolutionCertificate>> {
    affine_revolution_axis_with(body, &AxisSearch::default())
}

pub fn affine_revolution_axis_with(
    body: &ConvexBody,
    opts: &AxisSearch,
) -> Result<Option<RevolutionCertificate>> {
    let (canon, f) = canonicalize(body)?;
    let Some(cert) = revolution_axis_with(&canon, opts)? else {
        return Ok(None);
    };
    Ok(Some(pull_back(&cert, &f)?))
}

fn pull_back(cert: &RevolutionCertificate, f: &AffineMap) -> Result<RevolutionCertificate> {
    let inv = f.inverse();
    let a = cert.axis.direction();
    let axis = Line::new(inv.apply(cert.axis.base_point()), &(&inv.matrix * &a))?;
    let normal = f.matrix.transpose() * &a;
    let hyperplane = Subspace::affine_hyperplane(&normal, axis.base_point().clone())?;
    Ok(RevolutionCertificate {
        axis,
        hyperplane,
        ..cert.clone()
    })
}

/// Axis of revolution of the orthogonal projection onto the hyperplane `h`
/// of an `(n-1)`-ball lying in the affine hyperplane `gamma` with center
/// `x`: the line `(x + (gamma^⊥ + h^⊥)) ∩ h`.
pub fn predicted_projection_axis(gamma: &Subspace, x: &DVector<f64>, h: &Subspace) -> Result<Line> {
    let n = gamma.ambient_dim();
    if h.ambient_dim() != n || x.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: if h.ambient_dim() != n { h.ambient_dim() } else { x.len() },
        });
    }
    let ng = gamma.normal()?;
    let nh = h.normal()?;
    let scale = 1.0 + x.amax() + gamma.base_point().amax();
    if gamma.distance(x) > 1e-9 * scale {
        return Err(GeomError::InvalidArgument(
            "ball center does not lie on its hyperplane".into(),
        ));
    }
    let dir = &ng - &nh * ng.dot(&nh);
    if dir.norm() <= 1e-12 {
        return Err(GeomError::ParallelFlats);
    }
    Line::new(h.project_point(x), &dir)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// The axis is parallel to the projection direction.
    Ellipsoid,
    /// Projected axis in the shadow's coordinates.
    Axis(Line),
}

#[derive(Debug, Clone)]
pub struct RevolutionShadow {
    /// Orthogonal projection along `ℓ`, in coordinates of `plane`.
    pub shadow: ConvexBody,
    pub plane: Subspace,
    pub prediction: Prediction,
}

/// Shadow of a body with known axis `axis` along `ell`, with the predicted
/// shape: an ellipsoid when the axis is parallel to `ell`, otherwise an
/// affine body of revolution with axis the projected axis.
pub fn project_revolution(body: &ConvexBody, axis: &Line, ell: &Line) -> Result<RevolutionShadow> {
    let (shadow, plane) = project_along(body, &ell.direction())?;
    let prediction = if line_angle(&axis.direction(), &ell.direction()) <= PARALLEL_ANGLE {
        Prediction::Ellipsoid
    } else {
        Prediction::Axis(Line::new(
            plane.coords(axis.base_point()),
            &plane.coords(&axis.direction()),
        )?)
    };
    Ok(RevolutionShadow {
        shadow,
        plane,
        prediction,
    })
}

/// Residual of a shadow's prediction: the ellipsoid residual for
/// `Prediction::Ellipsoid`, otherwise the rotational residual of the
/// canonical shadow about the image of the predicted axis.
pub fn prediction_residual(s: &RevolutionShadow) -> Result<f64> {
    match &s.prediction {
        Prediction::Ellipsoid => Ok(is_ellipsoid(&s.shadow, DEFAULT_TOL)?.1),
        Prediction::Axis(line) => {
            let e = body_mvee(&s.shadow)?.ellipsoid;
            let f = normalizing_map(&e);
            let canon = s.shadow.affine_image(&f)?;
            revolution_residual(&canon, &f.map_line(line)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowBoundary {
    pub points: Vec<DVector<f64>>,
    pub direction: Line,
    /// Largest distance to the total-least-squares hyperplane over the
    /// body's diameter.
    pub planarity_residual: f64,
    /// Normal of the fitted hyperplane.
    pub plane_normal: DVector<f64>,
}

/// Fraction of the diameter above which touching points are considered a
/// face rather than a point.
pub const BAND_THRESHOLD: f64 = 0.1;

/// Touching points for outer normals orthogonal to `ell`.
pub fn shadow_boundary(body: &ConvexBody, ell: &Line, normals: usize, seed: u64) -> Result<ShadowBoundary> {
    let n = body.dim();
    if ell.ambient_dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: ell.ambient_dim(),
        });
    }
    if n < 2 {
        return Err(GeomError::InvalidArgument("dimension must be at least 2".into()));
    }
    let diam = body.diameter();
    let t = complement_of_vector(&ell.direction());
    let us: Vec<DVector<f64>> = sphere_directions(n - 1, normals.max(n + 1), seed)
        .iter()
        .map(|w| &t * w)
        .collect();
    let touching: Vec<_> = us.iter().map(|u| body.touching(u)).collect();
    let face = touching.iter().map(|x| x.spread).fold(0.0, f64::max);
    if face > BAND_THRESHOLD * diam {
        return Err(GeomError::ShadowBoundaryIsBand { spread: face / diam });
    }
    // a jump between neighboring normals means a flat piece in between
    let mut jump: f64 = 0.0;
    for i in 0..us.len() {
        let nearest = (0..us.len())
            .filter(|&j| j != i)
            .max_by(|&a, &b| us[i].dot(&us[a]).total_cmp(&us[i].dot(&us[b])))
            .expect("at least two normals");
        jump = jump.max((&touching[i].point - &touching[nearest].point).norm());
    }
    if jump > BAND_THRESHOLD * diam {
        return Err(GeomError::ShadowBoundaryIsBand { spread: jump / diam });
    }
    let points: Vec<DVector<f64>> = touching.into_iter().map(|x| x.point).collect();
    let (normal, residual) = plane_fit(&points);
    Ok(ShadowBoundary {
        points,
        direction: ell.clone(),
        planarity_residual: residual / diam,
        plane_normal: normal,
    })
}

/// Total-least-squares hyperplane: `(unit normal, max distance)`.
pub fn plane_fit(points: &[DVector<f64>]) -> (DVector<f64>, f64) {
    let n = points[0].len();
    let mut c = DVector::zeros(n);
    for p in points {
        c += p;
    }
    c /= points.len() as f64;
    let mut cov = DMatrix::zeros(n, n);
    for p in points {
        let d = p - &c;
        cov.ger(1.0, &d, &d, 1.0);
    }
    let (_, vecs) = crate::linalg::sym_eigen_sorted(&cov);
    let normal = vecs.column(0).into_owned();
    let worst = points
        .iter()
        .map(|p| (p - &c).dot(&normal).abs())
        .fold(0.0, f64::max);
    (normal, worst)
}
