use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::scan::{scan_projection_field, ScanOptions};
use super::{
    finish_report, run_trials, Attempt, Outcome, SuiteCheck, SuiteConfig, SuiteReport,
    ANGLE_FLOOR_DEG, LEMMA_IDS,
};
use crate::equivalence::{affine_equivalent_with, central_symmetry_center, EquivalenceOptions};
use crate::error::{GeomError, Result};
use crate::fit::is_ellipsoid;
use crate::generate::{generate, BodySpec, Profile};
use crate::geometry::{project_along, shapes, ConvexBody, Ellipsoid, Line, Subspace};
use crate::io::vector_json;
use crate::linalg::{
    complement_of_vector, line_angle, orthogonal_complement, random_conditioned, random_unit,
    sym_eigen_sorted,
};
use crate::revolution::{
    affine_revolution_axis, predicted_projection_axis, prediction_residual, project_revolution,
    shadow_boundary, Prediction,
};

/// Main threshold and admissible dimensions of a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteDefaults {
    pub tol: f64,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Dimension used when none is given; `None` alternates over the range.
    pub dim: Option<usize>,
    pub trials: usize,
}

pub fn suite_defaults(lemma_id: &str) -> Option<SuiteDefaults> {
    let d = |tol, min_dim, max_dim, dim, trials| SuiteDefaults {
        tol,
        min_dim,
        max_dim,
        dim,
        trials,
    };
    Some(match lemma_id {
        "lemma-3.2" => d(1e-6, 3, 8, None, 200),
        "lemma-3.3" => d(1e-3, 3, 5, Some(4), 50),
        "lemma-3.4-planarity" => d(5e-3, 3, 3, Some(3), 50),
        "lemma-3.4-contrapositive" => d(1e-2, 3, 3, Some(3), 50),
        "lemma-3.5" => d(2e-2, 5, 5, Some(5), 20),
        "cor-2.2-consistency" => d(1e-6, 2, 5, Some(3), 20),
        "thm-4-ellipsoid-criterion" => d(1e-3, 3, 4, Some(3), 20),
        _ => return None,
    })
}

const AXIS_ANGLE: f64 = 1e-2;
const SHADOW_DIRS: usize = 6;
const CRITERION_RESTARTS: usize = 8;

pub(crate) fn run(lemma_id: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let Some(defaults) = suite_defaults(lemma_id) else {
        return Err(GeomError::InvalidArgument(format!(
            "unknown lemma id `{lemma_id}`; expected one of {}",
            LEMMA_IDS.join(", ")
        )));
    };
    if let Some(d) = cfg.dim {
        if d < defaults.min_dim || d > defaults.max_dim {
            return Err(GeomError::InvalidArgument(format!(
                "{lemma_id} needs dimension in {}..={}",
                defaults.min_dim, defaults.max_dim
            )));
        }
    }
    let tol = cfg.tol.unwrap_or(defaults.tol);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(GeomError::InvalidArgument("tol must be positive".into()));
    }
    // suites without a fixed dimension alternate between the two smallest
    let dim_for = |trial: usize| cfg.dim.or(defaults.dim).unwrap_or(defaults.min_dim + trial % 2);
    let mut thresholds = BTreeMap::new();
    thresholds.insert("tol".to_string(), tol);
    thresholds.insert("angle_floor_deg".to_string(), ANGLE_FLOOR_DEG);
    let plant = cfg.plant_violation;
    let mut checks = Vec::new();
    let records = match lemma_id {
        "lemma-3.2" => run_trials(lemma_id, cfg, |i, rng| projected_ball(dim_for(i), tol, plant, rng)),
        "lemma-3.3" => {
            thresholds.insert("axis_angle".into(), AXIS_ANGLE);
            run_trials(lemma_id, cfg, |i, rng| revolution_shadow(i, dim_for(i), tol, plant, rng))
        }
        "lemma-3.4-planarity" => {
            let records = run_trials(lemma_id, cfg, |_, rng| planarity(dim_for(0), tol, plant, rng));
            let best = records
                .iter()
                .filter_map(|r| r.residuals.get("oblique_planarity").copied())
                .fold(0.0, f64::max);
            thresholds.insert("oblique_planarity_min".into(), 10.0 * tol);
            checks.push(SuiteCheck {
                name: "some oblique shadow boundary is not planar".into(),
                passed: best >= 10.0 * tol,
                value: best,
                threshold: 10.0 * tol,
            });
            records
        }
        "lemma-3.4-contrapositive" => {
            run_trials(lemma_id, cfg, |i, rng| contrapositive(i, dim_for(i), tol, plant, rng))
        }
        "lemma-3.5" => run_trials(lemma_id, cfg, |_, rng| axis_compatibility(dim_for(0), tol, plant, rng)),
        "cor-2.2-consistency" => {
            let dirs = cfg.dirs.unwrap_or(SHADOW_DIRS);
            run_trials(lemma_id, cfg, |i, rng| symmetry_consistency(dim_for(i), dirs, tol, plant, rng))
        }
        "thm-4-ellipsoid-criterion" => {
            let dirs = cfg.dirs.unwrap_or(SHADOW_DIRS);
            thresholds.insert("ellipsoid_exact".into(), 1e-6);
            thresholds.insert("equivalence_restarts".into(), CRITERION_RESTARTS as f64);
            run_trials(lemma_id, cfg, |i, rng| ellipsoid_criterion(i, dim_for(i), dirs, tol, plant, rng))
        }
        _ => unreachable!("checked above"),
    };
    Ok(finish_report(lemma_id, cfg, thresholds, records, checks))
}

fn outcome(pass: bool, note: Option<String>, params: Vec<(&str, Value)>, residuals: Vec<(&str, f64)>) -> Attempt {
    Attempt::Done(Outcome {
        pass,
        note,
        params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        residuals: residuals.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

fn floor_rad() -> f64 {
    ANGLE_FLOOR_DEG.to_radians()
}

/// `v` turned by `angle` toward a random orthogonal direction.
fn tilt(v: &DVector<f64>, angle: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let t = complement_of_vector(v);
    let w = &t * random_unit(rng, t.ncols());
    (v.normalize() * angle.cos() + w * angle.sin()).normalize()
}

/// Unit vector orthogonal to every column of `basis`.
fn random_orthogonal_to(basis: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let c = orthogonal_complement(basis);
    (&c * random_unit(rng, c.ncols())).normalize()
}

/// Projected ball: the axis formula against the principal axes of the
/// shadow of a unit ball in a random affine hyperplane.
fn projected_ball(n: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let ng = random_unit(rng, n);
    let nh = random_unit(rng, n);
    let angle = line_angle(&ng, &nh);
    if angle < floor_rad() || angle > std::f64::consts::FRAC_PI_2 - floor_rad() {
        return Ok(Attempt::Degenerate(format!("flat angle {angle:.3e} rad")));
    }
    let offset = rng.random_range(-1.0..1.0);
    let gamma = Subspace::affine_hyperplane(&ng, &ng * offset)?;
    let x = gamma.project_point(&(random_unit(rng, n) * rng.random_range(0.0..2.0)));
    let h = Subspace::hyperplane(&nh)?;
    let predicted = predicted_projection_axis(&gamma, &x, &h)?;
    let mut dir = predicted.direction();
    if plant {
        dir = tilt(&dir, 1e-3, rng);
    }

    // the shadow is {π_H(x) + Hb^T G y : |y| <= 1} in H coordinates
    let m = h.basis().transpose() * gamma.basis();
    let (vals, vecs) = sym_eigen_sorted(&(&m * m.transpose()));
    let k = vals.len();
    // one eigenvalue is cos² of the flat angle, the others equal 1
    let distinguished = h.basis() * vecs.column(0);
    let rest = vals.rows(1, k - 1);
    let spread = if k > 1 { rest.max() - rest.min() } else { 0.0 };
    let axis_angle = line_angle(&distinguished, &dir);
    let center = h.project_point(&x);
    let center_offset = predicted.as_subspace().distance(&center);
    let pass = axis_angle <= tol && spread <= 1e-9 && center_offset <= 1e-9 * (1.0 + center.norm());
    Ok(outcome(
        pass,
        None,
        vec![
            ("dim", json!(n)),
            ("flat_angle", json!(angle)),
            ("gamma_normal", vector_json(&ng)),
            ("gamma_offset", json!(offset)),
            ("h_normal", vector_json(&nh)),
        ],
        vec![
            ("axis_angle", axis_angle),
            ("multiplicity_spread", spread),
            ("center_offset", center_offset),
        ],
    ))
}

/// Shadows of affine bodies of revolution: ellipsoids along the axis, affine
/// bodies of revolution about the projected axis otherwise.
fn revolution_shadow(trial: usize, n: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let body_seed: u64 = rng.random();
    let spec = BodySpec::AffineImage {
        inner: Box::new(BodySpec::Revolution {
            dim: n,
            profile: Profile::RandomConcave { knots: 3 },
            axis: Some(random_unit(rng, n).iter().copied().collect()),
        }),
        matrix: None,
        max_cond: Some(20.0),
        translation: None,
    };
    let g = generate(&spec, body_seed)?;
    let true_axis = g.axis.expect("revolution generators plant an axis");
    let axis = if plant {
        Line::through_origin(&tilt(&true_axis.direction(), 0.3, rng))?
    } else {
        true_axis.clone()
    };
    let parallel = trial % 5 == 0;
    let ell = if parallel {
        true_axis.direction()
    } else {
        let e = random_unit(rng, n);
        if line_angle(&e, &true_axis.direction()) < floor_rad() {
            return Ok(Attempt::Degenerate("projection direction near the axis".into()));
        }
        e
    };
    let s = project_revolution(&g.body, &axis, &Line::through_origin(&ell)?)?;
    let residual = prediction_residual(&s)?;
    let mut residuals = vec![("prediction_residual", residual)];
    let mut pass = residual <= tol;
    let mut note = None;
    if let Prediction::Axis(predicted) = &s.prediction {
        match affine_revolution_axis(&s.shadow)? {
            Some(c) => {
                let angle = line_angle(&c.axis.direction(), &predicted.direction());
                residuals.push(("axis_angle", angle));
                residuals.push(("axis_residual", c.residual));
                pass &= angle <= AXIS_ANGLE;
            }
            None => {
                pass = false;
                note = Some("no axis found for the shadow".into());
            }
        }
    }
    Ok(outcome(
        pass,
        note,
        vec![
            ("dim", json!(n)),
            ("body_seed", json!(body_seed)),
            ("case", json!(if parallel { "parallel" } else { "oblique" })),
            ("direction", vector_json(&ell)),
        ],
        residuals,
    ))
}

fn smooth_spec(n: usize, p: f64, rng: &mut ChaCha8Rng) -> (BodySpec, DVector<f64>) {
    let axis = random_unit(rng, n);
    let spec = BodySpec::SmoothRevolution {
        dim: n,
        p,
        radius: rng.random_range(0.7..1.3),
        half_height: rng.random_range(0.7..1.3),
        axis: Some(axis.iter().copied().collect()),
        samples: None,
    };
    (spec, axis)
}

const BOUNDARY_NORMALS: usize = 200;

/// Shadow boundaries along directions in the hyperplane of revolution are
/// planar; along oblique directions they need not be.
fn planarity(n: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let p = rng.random_range(1.3..1.6);
    let (spec, axis) = smooth_spec(n, p, rng);
    let body_seed: u64 = rng.random();
    let body = generate(&spec, body_seed)?.body;
    let in_plane = random_orthogonal_to(&DMatrix::from_columns(&[axis.clone()]), rng);
    let oblique = (&axis + &in_plane).normalize();
    let ell = if plant { oblique.clone() } else { in_plane.clone() };
    let seed: u64 = rng.random();
    let planar = match shadow_boundary(&body, &Line::through_origin(&ell)?, BOUNDARY_NORMALS, seed) {
        Ok(b) => b.planarity_residual,
        Err(GeomError::ShadowBoundaryIsBand { spread }) => spread,
        Err(e) => return Err(e),
    };
    let skew = match shadow_boundary(&body, &Line::through_origin(&oblique)?, BOUNDARY_NORMALS, seed) {
        Ok(b) => b.planarity_residual,
        Err(GeomError::ShadowBoundaryIsBand { spread }) => spread,
        Err(e) => return Err(e),
    };
    Ok(outcome(
        planar <= tol,
        None,
        vec![
            ("dim", json!(n)),
            ("p", json!(p)),
            ("body_seed", json!(body_seed)),
            ("direction", vector_json(&ell)),
        ],
        vec![("planarity", planar), ("oblique_planarity", skew)],
    ))
}

/// Non-elliptical bodies of revolution have non-elliptical shadows along
/// directions in their hyperplane of revolution.
fn contrapositive(trial: usize, n: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let body_seed: u64 = rng.random();
    let (spec, axis, kind) = if plant || trial % 2 == 0 {
        let p = if plant { 2.0 } else { rng.random_range(1.3..1.6) };
        let (spec, axis) = smooth_spec(n, p, rng);
        (spec, axis, format!("smooth p={p:.6}"))
    } else {
        let axis = random_unit(rng, n);
        let spec = BodySpec::Revolution {
            dim: n,
            profile: Profile::RandomConcave { knots: 3 },
            axis: Some(axis.iter().copied().collect()),
        };
        (spec, axis, "piecewise-linear profile".to_string())
    };
    let body = generate(&spec, body_seed)?.body;
    let ell = random_orthogonal_to(&DMatrix::from_columns(&[axis]), rng);
    let (shadow, _) = project_along(&body, &ell)?;
    let (_, residual) = is_ellipsoid(&shadow, crate::fit::DEFAULT_TOL)?;
    Ok(outcome(
        residual >= tol,
        None,
        vec![
            ("dim", json!(n)),
            ("body", json!(kind)),
            ("body_seed", json!(body_seed)),
            ("direction", vector_json(&ell)),
        ],
        vec![("ellipsoid_residual", residual)],
    ))
}

/// `N_ℓ` and `L_ℓ` of the shadow along `ell`, in ambient coordinates.
fn shadow_axis(body: &ConvexBody, ell: &DVector<f64>) -> Result<Option<(DVector<f64>, DVector<f64>)>> {
    let (shadow, plane) = project_along(body, ell)?;
    let Some(c) = affine_revolution_axis(&shadow)? else {
        return Ok(None);
    };
    if c.degenerate {
        return Ok(None);
    }
    let axis = plane.basis() * c.axis.direction();
    let inner = orthogonal_complement(c.hyperplane.basis());
    let normal = plane.basis() * inner.column(0);
    Ok(Some((axis, normal)))
}

/// Component of `v` orthogonal to the plane spanned by the columns of `p`.
fn along_plane(p: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    v - p * (p.transpose() * v)
}

/// Axis compatibility: for `ℓ₂ ⊥ N_{ℓ₁}`, the shadow axes of `ℓ₁` and `ℓ₂`
/// project to the same line along the plane `P = span(ℓ₁, ℓ₂)`.
fn axis_compatibility(n: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let body_seed: u64 = rng.random();
    let spec = BodySpec::AffineImage {
        inner: Box::new(BodySpec::Revolution {
            dim: n,
            profile: Profile::RandomConcave { knots: 3 },
            axis: Some(random_unit(rng, n).iter().copied().collect()),
        }),
        matrix: None,
        max_cond: Some(20.0),
        translation: None,
    };
    let g = generate(&spec, body_seed)?;
    let true_axis = g.axis.expect("revolution generators plant an axis").direction();
    let l1 = random_unit(rng, n);
    if line_angle(&l1, &true_axis) < floor_rad() {
        return Ok(Attempt::Degenerate("first direction near the axis".into()));
    }
    let Some((axis1, normal1)) = shadow_axis(&g.body, &l1)? else {
        return Ok(Attempt::Degenerate("first shadow has no unique axis".into()));
    };
    let w = random_orthogonal_to(&DMatrix::from_columns(&[l1.clone(), normal1.clone()]), rng);
    let phi = rng.random_range(20f64.to_radians()..std::f64::consts::FRAC_PI_2);
    let l2 = (&l1 * phi.cos() + &w * phi.sin()).normalize();
    if line_angle(&l2, &true_axis) < floor_rad() {
        return Ok(Attempt::Degenerate("second direction near the axis".into()));
    }
    let Some((mut axis2, _)) = shadow_axis(&g.body, &l2)? else {
        return Ok(Attempt::Degenerate("second shadow has no unique axis".into()));
    };
    if plant {
        axis2 = random_unit(rng, n);
    }
    let p = DMatrix::from_columns(&[l1.clone(), w]);
    let (a1, a2, at) = (
        along_plane(&p, &axis1),
        along_plane(&p, &axis2),
        along_plane(&p, &true_axis),
    );
    let floor = floor_rad().sin();
    if a1.norm() < floor || at.norm() < floor {
        return Ok(Attempt::Degenerate("axis nearly inside the plane".into()));
    }
    if a2.norm() < floor {
        return Ok(Attempt::Done(Outcome {
            pass: false,
            note: Some("second axis projects to a point".into()),
            params: BTreeMap::new(),
            residuals: BTreeMap::new(),
        }));
    }
    let angle = line_angle(&a1, &a2);
    Ok(outcome(
        angle <= tol,
        None,
        vec![
            ("dim", json!(n)),
            ("body_seed", json!(body_seed)),
            ("l1", vector_json(&l1)),
            ("l2", vector_json(&l2)),
        ],
        vec![
            ("projected_axis_angle", angle),
            ("planted_axis_angle", line_angle(&a1, &at)),
            ("normal_l2_cos", normal1.normalize().dot(&l2).abs()),
        ],
    ))
}

/// Bodies whose shadows are pairwise affinely equivalent (ellipsoids) are
/// centrally symmetric.
fn symmetry_consistency(n: usize, dirs: usize, tol: f64, plant: bool, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let a = random_conditioned(rng, n, 20.0);
    let t = random_unit(rng, n) * rng.random_range(0.0..2.0);
    let e = Ellipsoid::from_inverse_shape(t.clone(), &a * a.transpose())?;
    let body = ConvexBody::ellipsoid(e).without_symmetry();
    let opts = EquivalenceOptions {
        seed: rng.random(),
        ..EquivalenceOptions::default()
    };
    let us: Vec<DVector<f64>> = (0..dirs.max(2)).map(|_| random_unit(rng, n)).collect();
    let shadows = us
        .iter()
        .map(|u| project_along(&body, u).map(|s| s.0))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..shadows.len() {
        for j in i + 1..shadows.len() {
            worst = worst.max(affine_equivalent_with(&shadows[i], &shadows[j], &opts)?.residual);
        }
    }
    let premise = worst <= opts.tol;
    let tested = if plant {
        // a simplex: not centrally symmetric
        let mut pts = vec![DVector::zeros(n)];
        for k in 0..n {
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            pts.push(v);
        }
        ConvexBody::point_cloud(pts, false)?
    } else {
        body
    };
    let (center, sym) = central_symmetry_center(&tested)?;
    let diam = tested.diameter();
    let sym = sym / diam;
    let center_error = (&center - &t).norm() / diam;
    Ok(outcome(
        !premise || sym <= tol,
        None,
        vec![("dim", json!(n)), ("translation", vector_json(&t))],
        vec![
            ("max_pairwise_residual", worst),
            ("symmetry_residual", sym),
            ("center_error", center_error),
        ],
    ))
}

/// A body all of whose sampled shadows are ellipsoids is an ellipsoid; the
/// falsifiable direction: non-ellipsoids show a non-elliptical shadow.
fn ellipsoid_criterion(
    trial: usize,
    n: usize,
    dirs: usize,
    tol: f64,
    plant: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Attempt> {
    let a = random_conditioned(rng, n, 20.0);
    let (kind, body) = match trial % 4 {
        0 => (
            "ellipsoid",
            ConvexBody::ellipsoid(Ellipsoid::from_inverse_shape(DVector::zeros(n), &a * a.transpose())?),
        ),
        1 => ("cube", shapes::cube(n).linear_image(&a)?),
        2 => ("cross-polytope", shapes::cross_polytope(n).linear_image(&a)?),
        _ => {
            let seed: u64 = rng.random();
            let b = generate(
                &BodySpec::RandomSymmetricPolytope {
                    dim: n,
                    points: 3 * n,
                },
                seed,
            )?
            .body;
            ("random-polytope", b.linear_image(&a)?)
        }
    };
    let is_ell = kind == "ellipsoid";
    let opts = ScanOptions {
        count: dirs.max(2),
        seed: rng.random(),
        tol: if plant { 1.0 } else { tol },
        axes: false,
        equivalence: EquivalenceOptions {
            restarts: CRITERION_RESTARTS,
            ..EquivalenceOptions::default()
        },
        ..ScanOptions::default()
    };
    let scan = scan_projection_field(&body, &opts)?;
    let all_elliptic = scan.shadows.iter().all(|s| s.is_ellipsoid);
    let max_res = scan.max_ellipsoid_residual();
    let max_pair = scan.max_pairwise();
    let pass = if is_ell {
        max_res <= 1e-6 && max_pair <= 1e-6
    } else {
        !all_elliptic
    };
    Ok(outcome(
        pass,
        None,
        vec![("dim", json!(n)), ("body", json!(kind)), ("directions", json!(scan.shadows.len()))],
        vec![
            ("max_ellipsoid_residual", max_res),
            ("max_pairwise_residual", max_pair),
        ],
    ))
}
