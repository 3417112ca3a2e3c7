//! Minimum-volume enclosing ellipsoids by barycentric coordinate ascent.
//!
//! The ascent is the Todd–Yıldırım variant of Khachiyan's method: each step
//! moves weight toward the point with the largest lifted Mahalanobis value
//! (or away from the support point with the smallest), with exact line
//! search. It stops once both the outward and the inward optimality gaps
//! are below `eps`; the larger of the two is reported as `dual_gap`.
//!
//! Dense samples of smooth boundaries touch the optimum along a continuum,
//! where the ascent crawls. Support samples and ellipsoid hulls go through
//! a log-barrier Newton solver instead.

use nalgebra::{DMatrix, DVector};

use super::barrier;
use crate::error::{GeomError, Result};
use crate::geometry::{ConvexBody, Ellipsoid, EllipsoidPiece, Representation};
use crate::linalg::{spd_condition, sym_eigen_sorted};

pub const DEFAULT_EPS: f64 = 1e-7;
const MAX_ITERATIONS: usize = 500_000;
const ILL_CONDITIONED: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct MveeResult {
    pub ellipsoid: Ellipsoid,
    /// Largest of the outward and inward optimality gaps at termination.
    pub dual_gap: f64,
    pub iterations: usize,
    /// Shape-matrix condition number exceeded 1e8.
    pub ill_conditioned: bool,
}

/// Lifted points: `x` for the centered problem, `(x, 1)` otherwise.
fn lift(points: &[DVector<f64>], centered: bool) -> Vec<DVector<f64>> {
    points
        .iter()
        .map(|x| {
            if centered {
                x.clone()
            } else {
                let mut q = DVector::zeros(x.len() + 1);
                q.rows_mut(0, x.len()).copy_from(x);
                q[x.len()] = 1.0;
                q
            }
        })
        .collect()
}

fn moment(q: &[DVector<f64>], w: &[f64]) -> DMatrix<f64> {
    let n = q[0].len();
    let mut x = DMatrix::zeros(n, n);
    for (qi, wi) in q.iter().zip(w) {
        if *wi > 0.0 {
            x.ger(*wi, qi, qi, 1.0);
        }
    }
    x
}

/// (1+eps)-approximate minimum-volume ellipsoid enclosing `points`. With
/// `centered`, the center is fixed at the origin and the ellipsoid encloses
/// `points ∪ -points`.
pub fn mvee(points: &[DVector<f64>], eps: f64, centered: bool) -> Result<MveeResult> {
    let raw = mvee_weighted(points, eps, centered)?;
    let worst = max_gauge(points, &raw.center, &raw.shape);
    finish(raw, worst)
}

/// Ascent output before the final rescaling.
struct RawFit {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    gap: f64,
    iterations: usize,
}

fn max_gauge(points: &[DVector<f64>], center: &DVector<f64>, shape: &DMatrix<f64>) -> f64 {
    points
        .iter()
        .map(|x| {
            let dx = x - center;
            dx.dot(&(shape * &dx))
        })
        .fold(0.0, f64::max)
}

/// Scales the fitted ellipsoid so that it encloses everything (`worst` is
/// the largest gauge value seen).
fn finish(raw: RawFit, worst: f64) -> Result<MveeResult> {
    let shape = if worst > 1.0 { raw.shape / worst } else { raw.shape };
    let ill = spd_condition(&shape) > ILL_CONDITIONED;
    let ellipsoid = Ellipsoid::new(raw.center, shape)?;
    Ok(MveeResult {
        ellipsoid,
        dual_gap: raw.gap,
        iterations: raw.iterations,
        ill_conditioned: ill,
    })
}

fn mvee_weighted(
    points: &[DVector<f64>],
    eps: f64,
    centered: bool,
) -> Result<RawFit> {
    if !(eps > 0.0) {
        return Err(GeomError::InvalidArgument("eps must be positive".into()));
    }
    let Some(first) = points.first() else {
        return Err(GeomError::PointsDoNotSpan);
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(GeomError::DimensionMismatch {
            expected: d,
            got: points.iter().find(|p| p.len() != d).map_or(0, |p| p.len()),
        });
    }
    if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
        return Err(GeomError::NonFinite("mvee input".into()));
    }
    let q = lift(points, centered);
    let n = q[0].len();
    let nf = n as f64;
    let m = q.len();
    {
        let sv = DMatrix::from_columns(&q).singular_values();
        let max = sv.max();
        if sv.len() < n || !(max > 0.0) || sv.min() <= 1e-12 * max {
            return Err(GeomError::PointsDoNotSpan);
        }
    }

    let mut w = vec![1.0 / m as f64; m];
    let mut iterations = 0;
    let mut omega = vec![0.0; m];
    let mut xinv = DMatrix::zeros(n, n);
    let mut gap;
    loop {
        if iterations % 64 == 0 {
            let x = moment(&q, &w);
            xinv = match x.clone().cholesky() {
                Some(c) => c.inverse(),
                None => return Err(GeomError::PointsDoNotSpan),
            };
            for (o, qi) in omega.iter_mut().zip(&q) {
                *o = qi.dot(&(&xinv * qi));
            }
        }
        let (jp, wp) = omega
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (i, &o)| if o > a.1 { (i, o) } else { a });
        let (jm, wm) = omega
            .iter()
            .zip(&w)
            .enumerate()
            .filter(|(_, (_, wi))| **wi > 0.0)
            .fold((0, f64::INFINITY), |a, (i, (&o, _))| if o < a.1 { (i, o) } else { a });
        let eps_plus = wp / nf - 1.0;
        let eps_minus = 1.0 - wm / nf;
        gap = eps_plus.max(eps_minus).max(0.0);
        if (eps_plus <= eps && eps_minus <= eps) || iterations >= MAX_ITERATIONS {
            break;
        }
        let (j, tau) = if eps_plus >= eps_minus {
            (jp, (wp - nf) / (nf * (wp - 1.0)))
        } else {
            let floor = -w[jm] / (1.0 - w[jm]);
            let t = if wm > 1.0 {
                ((wm - nf) / (nf * (wm - 1.0))).max(floor)
            } else {
                floor
            };
            (jm, t)
        };
        // rank-one update of X = sum w_i q_i q_i^T and of omega
        let qj = &q[j];
        let xq = &xinv * qj;
        let wj = omega[j];
        let denom = (1.0 - tau) + tau * wj;
        for (wi, i) in w.iter_mut().zip(0..) {
            *wi *= 1.0 - tau;
            if i == j {
                *wi += tau;
            }
        }
        if w[j] < 1e-300 {
            w[j] = 0.0;
        }
        for (o, qi) in omega.iter_mut().zip(&q) {
            let c = qi.dot(&xq);
            *o = (*o - tau * c * c / denom) / (1.0 - tau);
        }
        xinv = (&xinv - (&xq * xq.transpose()) * (tau / denom)) / (1.0 - tau);
        iterations += 1;
    }

    let (center, shape) = if centered {
        let x = moment(&q, &w);
        let inv = x.cholesky().ok_or(GeomError::PointsDoNotSpan)?.inverse();
        (DVector::zeros(d), inv / d as f64)
    } else {
        let mut c = DVector::zeros(d);
        for (x, wi) in points.iter().zip(&w) {
            c.axpy(*wi, x, 1.0);
        }
        let mut s = DMatrix::zeros(d, d);
        for (x, wi) in points.iter().zip(&w) {
            if *wi > 0.0 {
                let dx = x - &c;
                s.ger(*wi, &dx, &dx, 1.0);
            }
        }
        let inv = s.cholesky().ok_or(GeomError::PointsDoNotSpan)?.inverse();
        (c, inv / d as f64)
    };
    let shape = (&shape + shape.transpose()) * 0.5;
    Ok(RawFit {
        center,
        shape,
        gap,
        iterations,
    })
}

/// Enclosing ellipsoid of `points` by the barrier method. The reported gap
/// is the barrier's primal-dual gap per dimension.
fn barrier_fit(points: &[DVector<f64>], eps: f64, centered: bool) -> Result<RawFit> {
    let d = points[0].len();
    let q = lift(points, centered);
    let n = q[0].len();
    let fit = barrier::solve(&q, eps)?;
    let (center, shape) = if centered {
        (DVector::zeros(d), fit.q.clone())
    } else {
        let a = fit.q.view((0, 0), (d, d)).into_owned();
        let b = fit.q.view((0, d), (d, 1)).column(0).into_owned();
        let c = fit.q[(d, d)];
        let ainv_b = a
            .clone()
            .cholesky()
            .ok_or(GeomError::PointsDoNotSpan)?
            .solve(&b);
        let scale = 1.0 - c + b.dot(&ainv_b);
        if !(scale > 0.0) {
            return Err(GeomError::PointsDoNotSpan);
        }
        (-ainv_b, a / scale)
    };
    Ok(RawFit {
        center,
        shape: (&shape + shape.transpose()) * 0.5,
        gap: fit.gap / n as f64,
        iterations: fit.newton_steps,
    })
}

/// Points of `piece` maximizing `(x - e)^T Q (x - e)`: a trust-region
/// maximization of a convex quadratic over the parameter ball, solved through
/// the eigen-decomposition and the secular equation. Returns up to two
/// maximizers (both signs in the degenerate case).
pub(crate) fn farthest_in_piece(
    piece: &EllipsoidPiece,
    center: &DVector<f64>,
    shape: &DMatrix<f64>,
) -> Vec<(DVector<f64>, f64)> {
    let a = &piece.center - center;
    let eval = |x: &DVector<f64>| {
        let dx = x - center;
        dx.dot(&(shape * &dx))
    };
    let k = piece.axes.ncols();
    if k == 0 {
        return vec![(piece.center.clone(), eval(&piece.center))];
    }
    let m = &piece.axes;
    let g_mat = m.transpose() * shape * m;
    let g = m.transpose() * (shape * &a);
    let (vals, vecs) = sym_eigen_sorted(&g_mat);
    // descending order
    let lam: Vec<f64> = (0..k).rev().map(|i| vals[i]).collect();
    let v: Vec<DVector<f64>> = (0..k).rev().map(|i| vecs.column(i).into_owned()).collect();
    let gh: Vec<f64> = v.iter().map(|vi| vi.dot(&g)).collect();
    let gnorm = g.norm();
    let top = lam[0];
    let scale = top.abs().max(gnorm).max(1e-300);
    let tied: Vec<usize> = (0..k).filter(|&i| lam[i] >= top - 1e-12 * scale).collect();
    let g_top: f64 = tied.iter().map(|&i| gh[i] * gh[i]).sum::<f64>().sqrt();

    let mut ys: Vec<DVector<f64>> = Vec::new();
    if g_top <= 1e-12 * scale {
        // hard case: lambda = top; fill the remainder along the top eigenspace
        let mut y = DVector::zeros(k);
        for i in 0..k {
            if !tied.contains(&i) {
                y += &v[i] * (gh[i] / (top - lam[i]));
            }
        }
        let r2 = y.norm_squared();
        if r2 <= 1.0 {
            let tau = (1.0 - r2).sqrt();
            ys.push(&y + &v[tied[0]] * tau);
            ys.push(&y - &v[tied[0]] * tau);
        } else {
            ys.push(&y / r2.sqrt());
        }
    } else {
        // secular equation sum gh_i^2 / (lambda - lam_i)^2 = 1 on (top, top + |g|]
        let phi = |l: f64| -> f64 {
            (0..k)
                .map(|i| {
                    let t = gh[i] / (l - lam[i]);
                    t * t
                })
                .sum::<f64>()
                - 1.0
        };
        let mut lo = top;
        let mut hi = top + gnorm.max(1e-300);
        while phi(hi) > 0.0 {
            hi = top + 2.0 * (hi - top);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l = hi;
        let mut y = DVector::zeros(k);
        for i in 0..k {
            y += &v[i] * (gh[i] / (l - lam[i]));
        }
        let n = y.norm();
        if n > 0.0 {
            y /= n;
        }
        ys.push(y);
    }
    ys.into_iter()
        .map(|y| {
            let x = &piece.center + m * y;
            let f = eval(&x);
            (x, f)
        })
        .collect()
}

/// Minimum-volume enclosing ellipsoid of a body. Centered when `centered`.
///
/// Ellipsoids are returned as is. Hulls of ellipsoid pieces are fitted by
/// column generation: fit the current point set, add the farthest point of
/// every piece that sticks out, repeat until all pieces are enclosed to
/// 1e-9. Support samples are fitted through their touching points with the
/// barrier solver.
pub fn mvee_body(body: &ConvexBody, eps: f64, centered: bool) -> Result<MveeResult> {
    if let Some(e) = body.as_ellipsoid() {
        if !centered || e.center().iter().all(|x| *x == 0.0) {
            return Ok(MveeResult {
                ill_conditioned: e.condition() > ILL_CONDITIONED,
                ellipsoid: e,
                dual_gap: 0.0,
                iterations: 0,
            });
        }
    }
    match body.representation() {
        Representation::PointCloud(pts) => mvee(pts, eps, centered),
        Representation::SupportSample(s) => {
            let pts = s.touching_points();
            let raw = barrier_fit(&pts, eps, centered)?;
            let worst = max_gauge(&pts, &raw.center, &raw.shape);
            finish(raw, worst)
        }
        Representation::Ellipsoid(e) => mvee_pieces(&[e.as_piece()], eps, centered),
        Representation::EllipsoidHull(pieces) => mvee_pieces(pieces, eps, centered),
    }
}

fn mvee_pieces(pieces: &[EllipsoidPiece], eps: f64, centered: bool) -> Result<MveeResult> {
    let d = pieces[0].dim() as f64;
    let n = if centered { d } else { d + 1.0 };
    // a point x satisfies the ascent's (1 + eps) optimality condition
    // exactly when its gauge is at most this
    let threshold = 1.0 + eps * n / d;
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        pts.extend(p.sample_points(4 * p.axes.ncols().max(1), i as u64));
    }
    let mut total_iters = 0;
    for _round in 0..200 {
        let raw = barrier_fit(&pts, eps, centered)?;
        total_iters += raw.iterations;
        let mut worst = max_gauge(&pts, &raw.center, &raw.shape);
        let mut added = Vec::new();
        for p in pieces {
            for (x, f) in farthest_in_piece(p, &raw.center, &raw.shape) {
                worst = worst.max(f);
                if f > threshold {
                    added.push(x);
                }
            }
        }
        if added.is_empty() {
            let raw = RawFit {
                iterations: total_iters,
                ..raw
            };
            return finish(raw, worst);
        }
        pts.extend(added);
    }
    Err(GeomError::DegenerateBody(
        "ellipsoid-hull fit did not converge".into(),
    ))
}
