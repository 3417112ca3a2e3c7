//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

pub fn e(n: usize, i: usize) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    x[i] = 1.0;
    x
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let x = gaussian_vector(rng, n);
        let r = x.norm();
        if r > 1e-6 {
            return x / r;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn haar_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// Matrix `U diag(s) V^T` with singular values spread log-uniformly in
/// `[1, cond]` and overall scale in `[0.5, 2]`.
pub fn conditioned_matrix(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DMatrix<f64> {
    let u = haar_orthogonal(rng, n);
    let w = haar_orthogonal(rng, n);
    let scale = 0.5 + 1.5 * rng.random::<f64>();
    let s = DVector::from_fn(n, |i, _| {
        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        scale * cond.powf(t)
    });
    u * DMatrix::from_diagonal(&s) * w.transpose()
}

/// Equally spaced unit vectors on the circle.
pub fn circle_dirs(count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / count as f64;
            v(&[t.cos(), t.sin()])
        })
        .collect()
}

/// Golden-spiral points on the 2-sphere.
pub fn spiral_dirs(count: usize) -> Vec<DVector<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            v(&[r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// Dense direction set in any dimension: the circle, the spiral, or
/// seeded Gaussian directions plus the coordinate axes.
pub fn dense_dirs(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    match n {
        2 => circle_dirs(count),
        3 => spiral_dirs(count),
        _ => {
            let mut r = rng(seed);
            let mut out: Vec<DVector<f64>> = (0..n).flat_map(|i| [e(n, i), -e(n, i)]).collect();
            out.extend((0..count).map(|_| unit_vector(&mut r, n)));
            out
        }
    }
}

pub fn hull_support(points: &[DVector<f64>], u: &DVector<f64>) -> f64 {
    points.iter().map(|p| p.dot(u)).fold(f64::NEG_INFINITY, f64::max)
}

/// `sqrt(u^T Q^{-1} u)` for the ellipsoid `{x : x^T Q x <= 1}` centered at
/// `c`, plus `<c, u>`.
pub fn ellipsoid_support(c: &DVector<f64>, q: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    let qi = q.clone().try_inverse().expect("invertible");
    (u.dot(&(qi * u))).sqrt() + c.dot(u)
}

/// Acute angle between two lines given by direction vectors.
pub fn line_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    s.atan2(c)
}

pub fn cube_vertices(n: usize) -> Vec<DVector<f64>> {
    (0..1usize << n)
        .map(|s| DVector::from_fn(n, |i, _| if s >> i & 1 == 1 { 1.0 } else { -1.0 }))
        .collect()
}

pub fn cross_vertices(n: usize) -> Vec<DVector<f64>> {
    (0..n).flat_map(|i| [e(n, i), -e(n, i)]).collect()
}

/// Orthonormal basis (as columns) of the complement of `u`, by Gram-Schmidt
/// against the standard basis.
pub fn complement_basis(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let u = u / u.norm();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut x = e(n, i) - &u * u[i];
        for c in &cols {
            x -= c * c.dot(&x);
        }
        if x.norm() > 1e-6 && cols.len() < n - 1 {
            cols.push(x.normalize());
        }
    }
    DMatrix::from_columns(&cols)
}

/// Counter-clockwise hull of planar points by gift wrapping.
pub fn gift_wrap(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let start = points
        .iter()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("nonempty");
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = points[0];
        for &p in points {
            if next == current {
                next = p;
                continue;
            }
            let cross = (next.0 - current.0) * (p.1 - current.1) - (next.1 - current.1) * (p.0 - current.0);
            let farther = (p.0 - current.0).hypot(p.1 - current.1) > (next.0 - current.0).hypot(next.1 - current.1);
            if cross < -1e-12 || (cross.abs() <= 1e-12 && farther) {
                next = p;
            }
        }
        if next == start || hull.len() > points.len() {
            break;
        }
        hull.push(next);
        current = next;
    }
    hull
}
