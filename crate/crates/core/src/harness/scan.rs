use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::equivalence::{linear_equivalent_with, EquivalenceOptions};
use crate::error::{GeomError, Result};
use crate::fit::{body_mvee, is_ellipsoid, normalizing_map, DEFAULT_TOL};
use crate::geometry::{project_along, AffineMap, ConvexBody, Ellipsoid, Line, Subspace};
use crate::io::{body_json, to_stable_string};
use crate::linalg::orthogonal_complement;
use crate::revolution::affine_revolution_axis;
use crate::sampling::sphere_directions;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Explicit projection directions; `count` seeded directions otherwise.
    pub directions: Option<Vec<DVector<f64>>>,
    pub count: usize,
    pub seed: u64,
    /// Ellipsoid-recognition tolerance.
    pub tol: f64,
    pub equivalence: EquivalenceOptions,
    /// Search every non-elliptical shadow for an axis of revolution.
    pub axes: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            directions: None,
            count: 8,
            seed: 0,
            tol: DEFAULT_TOL,
            equivalence: EquivalenceOptions::default(),
            axes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxisReport {
    NotComputed,
    /// Elliptical shadow: every line through the center is an axis.
    Degenerate { residual: f64 },
    /// No axis fits within tolerance.
    NotRevolution,
    Axis {
        /// `L_ℓ` in ambient coordinates.
        axis: Line,
        /// `N_ℓ`, the normal of the hyperplane of revolution inside `ℓ⊥`.
        normal: Line,
        residual: f64,
        second_best: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowRecord {
    pub direction: DVector<f64>,
    /// Orthonormal basis of `u⊥` used for shadow coordinates.
    pub plane: Subspace,
    /// `F(u)`, in shadow coordinates.
    pub ellipsoid: Ellipsoid,
    /// Normalizer `β_u` sending `F(u)` to the unit ball.
    pub beta: AffineMap,
    pub canonical_digest: String,
    pub ellipsoid_residual: f64,
    pub is_ellipsoid: bool,
    pub axis: AxisReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub body_id: String,
    pub dim: usize,
    pub tol: f64,
    pub shadows: Vec<ShadowRecord>,
    /// Linear-equivalence residuals between canonical shadows.
    pub pairwise: DMatrix<f64>,
}

impl ScanReport {
    pub fn max_ellipsoid_residual(&self) -> f64 {
        self.shadows
            .iter()
            .map(|s| s.ellipsoid_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_pairwise(&self) -> f64 {
        self.pairwise.iter().copied().fold(0.0, f64::max)
    }
}

pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Shadows of `body` along sampled directions, their enclosing ellipsoids
/// and canonical forms, pairwise equivalence residuals and shadow axes.
pub fn scan_projection_field(body: &ConvexBody, opts: &ScanOptions) -> Result<ScanReport> {
    let n = body.dim();
    if n < 3 {
        return Err(GeomError::InvalidArgument(
            "scan needs dimension at least 3".into(),
        ));
    }
    let dirs = match &opts.directions {
        Some(d) => {
            if d.iter().any(|u| u.len() != n) {
                return Err(GeomError::DimensionMismatch {
                    expected: n,
                    got: d.iter().find(|u| u.len() != n).map_or(0, |u| u.len()),
                });
            }
            d.iter()
                .map(|u| {
                    let norm = u.norm();
                    if norm > 0.0 {
                        Ok(u / norm)
                    } else {
                        Err(GeomError::InvalidArgument("zero direction".into()))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => sphere_directions(n, opts.count, opts.seed),
    };
    if dirs.len() < 2 {
        return Err(GeomError::InvalidArgument(
            "scan needs at least two directions".into(),
        ));
    }
    let shadows: Vec<(ShadowRecord, ConvexBody)> = dirs
        .par_iter()
        .map(|u| shadow_record(body, u, opts))
        .collect::<Result<Vec<_>>>()?;
    let m = shadows.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let residuals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let eo = EquivalenceOptions {
                seed: opts.equivalence.seed.wrapping_add((i * m + j) as u64),
                ..opts.equivalence
            };
            linear_equivalent_with(&shadows[i].1, &shadows[j].1, &eo).map(|v| v.residual)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = DMatrix::zeros(m, m);
    for (&(i, j), r) in pairs.iter().zip(residuals) {
        pairwise[(i, j)] = r;
        pairwise[(j, i)] = r;
    }
    Ok(ScanReport {
        body_id: digest(&to_stable_string(&body_json(body))),
        dim: n,
        tol: opts.tol,
        shadows: shadows.into_iter().map(|(s, _)| s).collect(),
        pairwise,
    })
}

fn shadow_record(
    body: &ConvexBody,
    u: &DVector<f64>,
    opts: &ScanOptions,
) -> Result<(ShadowRecord, ConvexBody)> {
    let (shadow, plane) = project_along(body, u)?;
    let ellipsoid = body_mvee(&shadow)?.ellipsoid;
    let beta = normalizing_map(&ellipsoid);
    let canonical = shadow.affine_image(&beta)?;
    let (is_ell, residual) = is_ellipsoid(&shadow, opts.tol)?;
    let axis = if !opts.axes {
        AxisReport::NotComputed
    } else if is_ell {
        AxisReport::Degenerate { residual }
    } else {
        match affine_revolution_axis(&shadow)? {
            None => AxisReport::NotRevolution,
            Some(c) if c.degenerate => AxisReport::Degenerate {
                residual: c.residual,
            },
            Some(c) => {
                let basis = plane.basis();
                let dir = basis * c.axis.direction();
                let point = plane.lift(c.axis.base_point());
                let inner = orthogonal_complement(c.hyperplane.basis());
                let normal = basis * inner.column(0);
                AxisReport::Axis {
                    axis: Line::new(point, &dir)?,
                    normal: Line::through_origin(&normal)?,
                    residual: c.residual,
                    second_best: c.second_best,
                }
            }
        }
    };
    let record = ShadowRecord {
        direction: u.clone(),
        canonical_digest: digest(&to_stable_string(&body_json(&canonical))),
        plane,
        ellipsoid,
        beta,
        ellipsoid_residual: residual,
        is_ellipsoid: is_ell,
        axis,
    };
    Ok((record, canonical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn ellipsoid_scan_is_trivial() {
        let e = Ellipsoid::new(
            DVector::zeros(3),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 0.25])),
        )
        .unwrap();
        let r = scan_projection_field(&ConvexBody::ellipsoid(e), &ScanOptions::default()).unwrap();
        assert!(r.max_ellipsoid_residual() <= 1e-6);
        assert!(r.max_pairwise() <= 1e-6);
        assert!(r
            .shadows
            .iter()
            .all(|s| matches!(s.axis, AxisReport::Degenerate { .. })));
    }

    #[test]
    fn cube_square_and_hexagon_differ() {
        let s3 = 1.0 / 3f64.sqrt();
        let opts = ScanOptions {
            directions: Some(vec![
                DVector::from_vec(vec![0.0, 0.0, 1.0]),
                DVector::from_vec(vec![s3, s3, s3]),
            ]),
            axes: false,
            ..ScanOptions::default()
        };
        let r = scan_projection_field(&shapes::cube(3), &opts).unwrap();
        assert!(r.pairwise[(0, 1)] >= 0.1, "{}", r.pairwise[(0, 1)]);
        assert_eq!(r.pairwise[(0, 0)], 0.0);
    }
}
