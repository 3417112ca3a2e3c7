//! Canonical position and ellipsoid recognition.

use nalgebra::DVector;

use super::mvee::{mvee_body, MveeResult, DEFAULT_EPS};
use crate::error::Result;
use crate::geometry::{AffineMap, ConvexBody, Ellipsoid};
use crate::linalg::{complement_of_vector, sym_sqrt};
use crate::sampling::sphere_directions;

/// Minimum-volume enclosing ellipsoid matching the body's symmetry: the
/// centered fit for symmetric bodies, the general fit otherwise.
pub fn body_mvee(body: &ConvexBody) -> Result<MveeResult> {
    mvee_body(body, DEFAULT_EPS, body.is_symmetric())
}

/// Affine map sending `e` onto the unit ball: `x -> Q^{1/2} (x - c)`.
pub fn normalizing_map(e: &Ellipsoid) -> AffineMap {
    let a = sym_sqrt(e.shape());
    let t = -(&a * e.center());
    AffineMap {
        matrix: a,
        translation: t,
    }
}

/// `(f(K), f)` with `f` mapping the minimum-volume enclosing ellipsoid of
/// `K` onto the unit ball.
pub fn canonicalize(body: &ConvexBody) -> Result<(ConvexBody, AffineMap)> {
    let fit = body_mvee(body)?;
    canonicalize_with(body, &fit.ellipsoid)
}

fn canonicalize_with(body: &ConvexBody, e: &Ellipsoid) -> Result<(ConvexBody, AffineMap)> {
    let f = normalizing_map(e);
    if body.as_ellipsoid().is_some() {
        return Ok((ConvexBody::unit_ball(body.dim()), f));
    }
    Ok((body.affine_image(&f)?, f))
}

pub const DEFAULT_TOL: f64 = 1e-3;

fn default_directions(dim: usize) -> usize {
    match dim {
        0..=2 => 720,
        3 => 2000,
        _ => 4000,
    }
}

/// Whether `K` coincides with its minimum-volume enclosing ellipsoid `E`,
/// measured by `max_u (h_E(u) - h_K(u)) / (h_E(u) - <c, u>)` over sampled
/// directions refined by local search. The denominator is the support of
/// `E` about its own center, so the residual is invariant under translation
/// and dilation.
pub fn is_ellipsoid(body: &ConvexBody, tol: f64) -> Result<(bool, f64)> {
    is_ellipsoid_with(body, tol, default_directions(body.dim()), 0)
}

pub fn is_ellipsoid_with(body: &ConvexBody, tol: f64, directions: usize, seed: u64) -> Result<(bool, f64)> {
    if body.as_ellipsoid().is_some() {
        return Ok((0.0 <= tol, 0.0));
    }
    let e = body_mvee(body)?.ellipsoid;
    let r = ellipsoid_gap(body, &e, directions, seed);
    Ok((r <= tol, r))
}

/// Largest relative support gap between `body` and an enclosing ellipsoid.
pub fn ellipsoid_gap(body: &ConvexBody, e: &Ellipsoid, directions: usize, seed: u64) -> f64 {
    let gap = |u: &DVector<f64>| {
        let he = e.support(u);
        (he - body.support(u)) / (he - e.center().dot(u))
    };
    let dirs = sphere_directions(body.dim(), directions.max(1), seed);
    let mut scored: Vec<(f64, usize)> = dirs.iter().enumerate().map(|(i, u)| (gap(u), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored[0].0;
    for &(start, i) in scored.iter().take(6) {
        best = best.max(refine(&dirs[i], start, &gap));
    }
    best.max(0.0)
}

// Pattern search on the sphere for a local maximum of `f`.
fn refine(u0: &DVector<f64>, f0: f64, f: &impl Fn(&DVector<f64>) -> f64) -> f64 {
    let mut u = u0.clone();
    let mut fu = f0;
    let mut step = 0.05;
    while step > 1e-7 {
        let t = complement_of_vector(&u);
        let mut moved = false;
        for j in 0..t.ncols() {
            for s in [step, -step] {
                let mut v = &u + t.column(j) * s;
                v /= v.norm();
                let fv = f(&v);
                if fv > fu {
                    u = v;
                    fu = fv;
                    moved = true;
                    break;
                }
            }
            if moved {
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    fu
}
