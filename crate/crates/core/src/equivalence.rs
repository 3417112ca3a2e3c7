//! Linear and affine equivalence of convex bodies, and central symmetry.
//!
//! Both bodies are put in canonical position (enclosing ellipsoid = unit
//! ball). Any linear map between canonical bodies preserves the unit ball,
//! so equivalence reduces to a search over the orthogonal group, done by
//! multi-start Nelder–Mead on a Cayley chart around each start.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::fit::canonicalize;
use crate::geometry::{AffineMap, ConvexBody, Representation};
use crate::linalg::{
    cayley, nearest_orthogonal, random_orthogonal, skew_dim, skew_from_params, sym_eigen_sorted,
};
use crate::optim::nelder_mead;
use crate::sampling::{derive_rng, sphere_directions};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_RESTARTS: usize = 50;
const BATCH: usize = 8;
const CONTACT_BASIS: f64 = 1e-5;
const CONTACT_CANDIDATE: f64 = 1e-3;
const GRAM_TOL: f64 = 1e-3;
const MAX_MATCHINGS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Best support distance between the aligned canonical forms.
    pub residual: f64,
    /// Map sending the first body onto (approximately) the second.
    pub witness: AffineMap,
    /// Orthogonal matrix aligning the canonical forms.
    pub alignment: DMatrix<f64>,
    pub restarts_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceOptions {
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Direction count for the support distance; dimension-based default
    /// when `None`.
    pub directions: Option<usize>,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            directions: None,
        }
    }
}

impl EquivalenceOptions {
    pub fn new(tol: f64, restarts: usize) -> Self {
        Self {
            tol,
            restarts,
            ..Self::default()
        }
    }
}

pub fn default_direction_count(dim: usize) -> usize {
    match dim {
        0..=2 => 256,
        3 => 600,
        4 => 1200,
        _ => 2000,
    }
}

/// Center `c` minimizing `max_u |h(u) - h(-u) - 2<c, u>|` over sampled
/// directions, with the attained minimum. The minimax fit is computed by
/// Lawson's iteratively reweighted least squares.
pub fn central_symmetry_center(body: &ConvexBody) -> Result<(DVector<f64>, f64)> {
    let n = body.dim();
    let count = match n {
        0..=2 => 360,
        3 => 1000,
        _ => 2000,
    };
    let dirs = sphere_directions(n, count, 0);
    let g: Vec<f64> = dirs
        .iter()
        .map(|u| body.support(u) - body.support(&-u))
        .collect();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(GeomError::DegenerateBody("support is not finite".into()));
    }
    let resid = |c: &DVector<f64>| -> Vec<f64> {
        dirs.iter()
            .zip(&g)
            .map(|(u, gi)| gi - 2.0 * c.dot(u))
            .collect()
    };
    let max_abs = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut w = vec![1.0 / count as f64; count];
    let mut best_c = DVector::zeros(n);
    let mut best = max_abs(&resid(&best_c));
    for _ in 0..400 {
        let mut ata = DMatrix::zeros(n, n);
        let mut atb = DVector::zeros(n);
        for ((u, gi), wi) in dirs.iter().zip(&g).zip(&w) {
            ata.ger(4.0 * wi, u, u, 1.0);
            atb.axpy(2.0 * wi * gi, u, 1.0);
        }
        let Some(c) = ata.cholesky().map(|ch| ch.solve(&atb)) else {
            break;
        };
        let r = resid(&c);
        let m = max_abs(&r);
        if m < best {
            best = m;
            best_c = c;
        }
        let total: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri.abs()).sum();
        if !(total > 0.0) || best <= 1e-15 * (1.0 + g.iter().fold(0.0f64, |a, x| a.max(x.abs()))) {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi *= ri.abs() / total;
        }
    }
    Ok((best_c, best))
}

/// Decides whether some linear map sends `k1` onto `k2`. Bodies that are not
/// both symmetric are compared about their enclosing-ellipsoid centers, so
/// the witness may carry a translation.
pub fn linear_equivalent(
    k1: &ConvexBody,
    k2: &ConvexBody,
    tol: f64,
    restarts: usize,
) -> Result<EquivalenceVerdict> {
    linear_equivalent_with(k1, k2, &EquivalenceOptions::new(tol, restarts))
}

pub fn linear_equivalent_with(
    k1: &ConvexBody,
    k2: &ConvexBody,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceVerdict> {
    check_dims(k1, k2)?;
    let n = k1.dim();
    let (a, b) = if k1.is_symmetric() && k2.is_symmetric() {
        (k1.clone(), k2.clone())
    } else {
        (k1.clone().without_symmetry(), k2.clone().without_symmetry())
    };
    equivalence_core(&a, &b, &AffineMap::identity(n), &AffineMap::identity(n), opts)
}

/// Decides whether some affine map sends `k1` onto `k2`. Centrally symmetric
/// bodies are first translated to their symmetry centers.
pub fn affine_equivalent(
    k1: &ConvexBody,
    k2: &ConvexBody,
    tol: f64,
    restarts: usize,
) -> Result<EquivalenceVerdict> {
    affine_equivalent_with(k1, k2, &EquivalenceOptions::new(tol, restarts))
}

pub fn affine_equivalent_with(
    k1: &ConvexBody,
    k2: &ConvexBody,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceVerdict> {
    check_dims(k1, k2)?;
    let (a, ta) = symmetric_form(k1)?;
    let (b, tb) = symmetric_form(k2)?;
    let (a, b) = if a.is_symmetric() && b.is_symmetric() {
        (a, b)
    } else {
        (a.without_symmetry(), b.without_symmetry())
    };
    equivalence_core(&a, &b, &ta, &tb, opts)
}

fn check_dims(k1: &ConvexBody, k2: &ConvexBody) -> Result<()> {
    if k1.dim() != k2.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: k1.dim(),
            got: k2.dim(),
        });
    }
    Ok(())
}

/// The body moved to its symmetry center when it has one, with the
/// translation applied.
fn symmetric_form(k: &ConvexBody) -> Result<(ConvexBody, AffineMap)> {
    let n = k.dim();
    if k.is_symmetric() {
        return Ok((k.clone(), AffineMap::identity(n)));
    }
    let (c, r) = central_symmetry_center(k)?;
    let scale = k.diameter().max(1e-300);
    if r <= 1e-9 * scale {
        let shift = AffineMap::translation(-c);
        let moved = k.affine_image(&shift)?;
        if let Ok(sym) = moved.into_symmetric() {
            return Ok((sym, shift));
        }
    }
    Ok((k.clone().without_symmetry(), AffineMap::identity(n)))
}

/// Support samples are aligned through their touching-point clouds so that
/// rotated support queries stay cheap.
fn alignable(k: &ConvexBody) -> Result<ConvexBody> {
    match k.representation() {
        Representation::SupportSample(_) => k.to_point_cloud(0, 0),
        _ => Ok(k.clone()),
    }
}

fn equivalence_core(
    k1: &ConvexBody,
    k2: &ConvexBody,
    pre1: &AffineMap,
    pre2: &AffineMap,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceVerdict> {
    let n = k1.dim();
    let (c1, f1) = canonicalize(k1)?;
    let (c2, f2) = canonicalize(k2)?;
    let c1 = alignable(&c1)?;
    let c2 = alignable(&c2)?;
    let count = opts.directions.unwrap_or_else(|| default_direction_count(n));
    let dirs = sphere_directions(n, count, opts.seed);
    let (w, residual, restarts_used) = align_orthogonal(&c1, &c2, &dirs, opts);
    let g1 = f1.compose(pre1);
    let g2 = f2.compose(pre2);
    let inner = AffineMap {
        matrix: w.clone(),
        translation: DVector::zeros(n),
    };
    let witness = g2.inverse().compose(&inner.compose(&g1));
    Ok(EquivalenceVerdict {
        equivalent: residual <= opts.tol,
        residual,
        witness,
        alignment: w,
        restarts_used,
    })
}

struct Objective<'a> {
    k1: &'a ConvexBody,
    dirs: &'a [DVector<f64>],
    h2: Vec<f64>,
}

impl Objective<'_> {
    /// `max_u |h_{W K1}(u) - h_{K2}(u)|`, with `h_{W K1}(u) = h_{K1}(W^T u)`.
    fn eval(&self, w: &DMatrix<f64>) -> f64 {
        let wt = w.transpose();
        let mut worst: f64 = 0.0;
        for (u, h2) in self.dirs.iter().zip(&self.h2) {
            let d = (self.k1.support(&(&wt * u)) - h2).abs();
            if !(d <= worst) {
                worst = d;
            }
        }
        worst
    }

    /// Nelder-Mead on the Cayley chart around `w0`, restarted with shrinking
    /// simplices while the value stays below `polish_below`.
    fn local_search(&self, w0: DMatrix<f64>, polish_below: f64) -> (DMatrix<f64>, f64) {
        let n = w0.nrows();
        let p = skew_dim(n);
        let mut w = w0;
        let mut fw = self.eval(&w);
        if p == 0 {
            return (w, fw);
        }
        let mut step = 0.4;
        for _ in 0..6 {
            let base = w.clone();
            let mut f = |x: &[f64]| self.eval(&(&base * cayley(&skew_from_params(x, n))));
            let (x, v, _) = nelder_mead(&mut f, &vec![0.0; p], step, 1e-13, 1e-11, 300 * p + 200);
            if v < fw {
                w = &base * cayley(&skew_from_params(&x, n));
                fw = v;
            } else if step < 1e-3 {
                break;
            }
            if fw > polish_below {
                break;
            }
            step = (step * 0.2).max(1e-4);
        }
        (w, fw)
    }
}

/// Frame candidates from the support-weighted direction moments: if the
/// moments have distinct eigenvalues, any orthogonal alignment maps
/// eigenvectors to eigenvectors up to sign.
fn moment_start(obj: &Objective, k1: &ConvexBody) -> DMatrix<f64> {
    let n = k1.dim();
    let mut m1 = DMatrix::zeros(n, n);
    let mut m2 = DMatrix::zeros(n, n);
    for (u, h2) in obj.dirs.iter().zip(&obj.h2) {
        m1.ger(k1.support(u), u, u, 1.0);
        m2.ger(*h2, u, u, 1.0);
    }
    let (l1, v1) = sym_eigen_sorted(&m1);
    let (_, v2) = sym_eigen_sorted(&m2);
    let scale = l1.amax().max(1e-300);
    let gaps_ok = (1..n).all(|i| (l1[i] - l1[i - 1]).abs() > 1e-3 * scale);
    if !gaps_ok {
        return DMatrix::identity(n, n);
    }
    let mut best = (f64::INFINITY, DMatrix::identity(n, n));
    for signs in 0..(1usize << n) {
        let s = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            if signs >> i & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        }));
        let w = &v2 * s * v1.transpose();
        let v = obj.eval(&w);
        if v < best.0 {
            best = (v, w);
        }
    }
    best.1
}

/// Orthogonal maps send the contact points of one canonical form (vertices on
/// the unit sphere) to those of the other. A well-spread basis of contacts is
/// matched against Gram-consistent tuples of the other body's contacts, and
/// the best resulting map is kept.
fn contact_start(obj: &Objective, k1: &ConvexBody, k2: &ConvexBody) -> Option<(DMatrix<f64>, f64)> {
    let (Representation::PointCloud(p1), Representation::PointCloud(p2)) =
        (k1.representation(), k2.representation())
    else {
        return None;
    };
    let n = k1.dim();
    let basis = spread_basis(p1.iter().filter(|p| p.norm() >= 1.0 - CONTACT_BASIS), n)?;
    let targets: Vec<&DVector<f64>> = p2
        .iter()
        .filter(|q| q.norm() >= 1.0 - CONTACT_CANDIDATE)
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| basis[i].dot(&basis[j]));
    let src_inv = DMatrix::from_columns(&basis).try_inverse()?;
    let mut matcher = GramMatcher {
        targets: &targets,
        gram: &gram,
        budget: MAX_MATCHINGS,
        best: None,
        score: |chosen: &[usize]| {
            let cols: Vec<DVector<f64>> = chosen.iter().map(|&i| targets[i].clone()).collect();
            let w = nearest_orthogonal(&(DMatrix::from_columns(&cols) * &src_inv));
            let v = obj.eval(&w);
            (w, v)
        },
    };
    matcher.extend(&mut Vec::with_capacity(n));
    matcher.best
}

/// Greedy pick of `n` points, each as far as possible from the span of the
/// previous ones; `None` when no well-conditioned choice exists.
fn spread_basis<'a>(
    points: impl Iterator<Item = &'a DVector<f64>>,
    n: usize,
) -> Option<Vec<DVector<f64>>> {
    let points: Vec<&DVector<f64>> = points.collect();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, r) = points
            .iter()
            .map(|p| {
                let mut r = (*p).clone();
                for f in &frame {
                    r -= f * f.dot(&r);
                }
                (*p, r)
            })
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        if r.norm() < 0.1 * p.norm() {
            return None;
        }
        frame.push(r.normalize());
        basis.push(p.clone());
    }
    Some(basis)
}

struct GramMatcher<'a, F> {
    targets: &'a [&'a DVector<f64>],
    gram: &'a DMatrix<f64>,
    budget: usize,
    best: Option<(DMatrix<f64>, f64)>,
    score: F,
}

impl<F: Fn(&[usize]) -> (DMatrix<f64>, f64)> GramMatcher<'_, F> {
    fn extend(&mut self, chosen: &mut Vec<usize>) {
        let k = chosen.len();
        if k == self.gram.nrows() {
            self.budget -= 1;
            let (w, v) = (self.score)(chosen);
            if self.best.as_ref().is_none_or(|b| v < b.1) {
                self.best = Some((w, v));
            }
            return;
        }
        for t in 0..self.targets.len() {
            if self.budget == 0 {
                return;
            }
            let q = self.targets[t];
            let consistent = (q.norm_squared() - self.gram[(k, k)]).abs() <= GRAM_TOL
                && chosen
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| (self.targets[c].dot(q) - self.gram[(i, k)]).abs() <= GRAM_TOL);
            if consistent && !chosen.contains(&t) {
                chosen.push(t);
                self.extend(chosen);
                chosen.pop();
            }
        }
    }
}

/// Best orthogonal `W` minimizing the support distance between `W K1` and
/// `K2` over `dirs`: `(W, residual, restarts used)`.
pub fn align_orthogonal(
    k1: &ConvexBody,
    k2: &ConvexBody,
    dirs: &[DVector<f64>],
    opts: &EquivalenceOptions,
) -> (DMatrix<f64>, f64, usize) {
    let n = k1.dim();
    let obj = Objective {
        k1,
        dirs,
        h2: dirs.iter().map(|u| k2.support(u)).collect(),
    };
    let restarts = opts.restarts.max(1);
    let polish_below = 100.0 * opts.tol;
    let start = |r: usize| -> DMatrix<f64> {
        let mut rng = derive_rng(opts.seed, r as u64);
        random_orthogonal(&mut rng, n, if r % 2 == 1 { -1.0 } else { 1.0 })
    };
    let moments = moment_start(&obj, k1);
    let first = match contact_start(&obj, k1, k2) {
        Some((w, v)) if v < obj.eval(&moments) => w,
        _ => moments,
    };
    let (w, v) = obj.local_search(first, polish_below);
    if v <= opts.tol {
        return (w, v, 1);
    }
    let mut best = Some((w, v));
    let mut used = 1;
    while used < restarts {
        let batch: Vec<usize> = (used..(used + BATCH).min(restarts)).collect();
        let results: Vec<(DMatrix<f64>, f64)> = batch
            .par_iter()
            .map(|&r| obj.local_search(start(r), polish_below))
            .collect();
        used += batch.len();
        for (w, v) in results {
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((w, v));
            }
        }
        if best.as_ref().is_some_and(|b| b.1 <= opts.tol) {
            break;
        }
    }
    let (w, v) = best.expect("at least one restart");
    (w, v, used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use crate::linalg::orthogonality_defect;

    #[test]
    fn cube_matches_rotated_cube() {
        let mut rng = derive_rng(3, 0);
        let r = random_orthogonal(&mut rng, 3, 1.0);
        let cube = shapes::cube(3);
        let rotated = cube.linear_image(&r).unwrap();
        let v = linear_equivalent(&cube, &rotated, DEFAULT_TOL, DEFAULT_RESTARTS).unwrap();
        assert!(v.equivalent && v.residual <= 1e-6, "{}", v.residual);
        assert!(orthogonality_defect(&v.alignment) < 1e-8);
    }

    #[test]
    fn reflexive() {
        let cube = shapes::cube(3);
        let v = linear_equivalent(&cube, &cube, DEFAULT_TOL, DEFAULT_RESTARTS).unwrap();
        assert!(v.residual <= 1e-10, "{}", v.residual);
    }

    #[test]
    fn translated_ball_center() {
        let t = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let ball = ConvexBody::unit_ball(3).translated(&t).unwrap();
        let (c, r) = central_symmetry_center(&ball).unwrap();
        assert!((c - t).norm() < 1e-9 && r <= 1e-8);
    }

    #[test]
    fn triangle_is_not_symmetric() {
        let (_, r) = central_symmetry_center(&shapes::triangle()).unwrap();
        assert!(r > 0.05);
    }
}
