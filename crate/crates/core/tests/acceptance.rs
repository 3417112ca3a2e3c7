//! One line per acceptance criterion, at the published tolerances. Exits
//! with status 1 when any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DVector;
use rand::Rng;

use shadowgeom::equivalence::linear_equivalent;
use shadowgeom::fit::{mvee, DEFAULT_EPS};
use shadowgeom::generate::{generate, BodySpec, Profile};
use shadowgeom::geometry::{shapes, ConvexBody, Ellipsoid};
use shadowgeom::harness::{scan_projection_field, verify, ScanOptions, SuiteConfig, SuiteReport, TrialStatus};
use shadowgeom::revolution::{affine_revolution_axis, revolution_axis};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn symmetric_cloud(g: &mut rand_chacha::ChaCha8Rng, n: usize, half: usize) -> Vec<DVector<f64>> {
    let pts: Vec<_> = (0..half).map(|_| gaussian_vector(g, n)).collect();
    pts.iter().cloned().chain(pts.iter().map(|p| -p)).collect()
}

fn mvee_correctness() -> Outcome {
    let start = Instant::now();
    let mut g = rng(1);
    let (mut contain, mut john, mut gap) = (f64::NEG_INFINITY, f64::INFINITY, 0.0f64);
    for i in 0..100 {
        let n = 3 + i % 2;
        let half = g.random_range(n + 1..=32);
        let pts = symmetric_cloud(&mut g, n, half);
        let r = mvee(&pts, DEFAULT_EPS, true).unwrap();
        let (c, q) = (r.ellipsoid.center().clone(), r.ellipsoid.shape().clone());
        for p in &pts {
            let d = p - &c;
            contain = contain.max(d.dot(&(&q * &d)) - 1.0);
        }
        let scale = 1.0 / (n as f64).sqrt();
        for u in dense_dirs(n, 500, i as u64) {
            john = john.min(hull_support(&pts, &u) - scale * ellipsoid_support(&c, &q, &u));
        }
        gap = gap.max(r.dual_gap);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        contain <= 1e-6 && john >= -1e-6 && gap <= DEFAULT_EPS && secs < 60.0,
        format!("containment {contain:.2e}, John slack {john:.2e}, dual gap {gap:.2e}, {secs:.1} s"),
    )
}

fn mvee_equivariance() -> Outcome {
    let mut g = rng(2);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 3;
        let centered = i % 2 == 0;
        let half = n + 1 + g.random_range(0..8);
        let pts = if centered {
            symmetric_cloud(&mut g, n, half)
        } else {
            (0..2 * half).map(|_| gaussian_vector(&mut g, n)).collect()
        };
        let a = conditioned_matrix(&mut g, n, 50.0);
        let t = if centered { DVector::zeros(n) } else { gaussian_vector(&mut g, n) };
        let image: Vec<_> = pts.iter().map(|p| &a * p + &t).collect();
        let fit = mvee(&image, DEFAULT_EPS, centered).unwrap().ellipsoid;
        let base = mvee(&pts, DEFAULT_EPS, centered).unwrap().ellipsoid;
        // A·{x : (x-c)ᵀQ(x-c) <= 1} has center Ac + t and shape A⁻ᵀ Q A⁻¹
        let ai = a.clone().try_inverse().unwrap();
        let q = ai.transpose() * base.shape() * &ai;
        let c = &a * base.center() + &t;
        for u in dense_dirs(n, 500, i as u64) {
            worst = worst.max((ellipsoid_support(fit.center(), fit.shape(), &u) - ellipsoid_support(&c, &q, &u)).abs());
        }
    }
    outcome(worst <= 1e-5, format!("max support distance {worst:.2e} over 50 pairs"))
}

fn canonical_reduction() -> Outcome {
    let mut g = rng(3);
    let mut worst = 0.0f64;
    let mut misses = 0;
    let mut most_restarts = 0;
    for i in 0..100 {
        let n = 2 + i % 3;
        let pts: Vec<_> = (0..n + g.random_range(0..6)).map(|_| gaussian_vector(&mut g, n)).collect();
        let k = ConvexBody::symmetric_point_cloud(pts).unwrap();
        let a = conditioned_matrix(&mut g, n, 20.0);
        let verdict = linear_equivalent(&k, &k.linear_image(&a).unwrap(), 1e-3, 50).unwrap();
        if !verdict.equivalent || verdict.residual > 1e-3 {
            misses += 1;
        }
        worst = worst.max(verdict.residual);
        most_restarts = most_restarts.max(verdict.restarts_used);
    }

    // reference: both canonical forms have their vertices on the unit sphere;
    // sample the orthogonal group and score each rotation on exact supports
    let cube: Vec<_> = cube_vertices(3).iter().map(|x| x / 3f64.sqrt()).collect();
    let cross = cross_vertices(3);
    let dirs = spiral_dirs(300);
    let cross_h: Vec<f64> = dirs.iter().map(|u| hull_support(&cross, u)).collect();
    let mut oracle = f64::INFINITY;
    for _ in 0..100_000 {
        let q = haar_orthogonal(&mut g, 3);
        let turned: Vec<_> = cube.iter().map(|x| &q * x).collect();
        let mut far = 0.0f64;
        for (u, hc) in dirs.iter().zip(&cross_h) {
            far = far.max((hull_support(&turned, u) - hc).abs());
            if far >= oracle {
                break;
            }
        }
        oracle = oracle.min(far);
    }
    let apart = linear_equivalent(&shapes::cube(3), &shapes::cross_polytope(3), 1e-3, 50).unwrap();
    outcome(
        misses == 0 && oracle >= 0.15 && !apart.equivalent && apart.residual >= 0.15,
        format!(
            "planted: {misses} misses, max residual {worst:.2e}, max restarts {most_restarts}; \
             cube vs cross-polytope {:.3} (oracle {oracle:.3})",
            apart.residual
        ),
    )
}

fn timed_suite(id: &str, trials: usize) -> (SuiteReport, Duration) {
    let start = Instant::now();
    let report = verify(id, &SuiteConfig::new(trials, 1)).unwrap();
    (report, start.elapsed())
}

fn dims(r: &SuiteReport) -> Vec<u64> {
    let mut d: Vec<u64> = r.records.iter().filter_map(|t| t.params.get("dim")?.as_u64()).collect();
    d.sort_unstable();
    d.dedup();
    d
}

fn counts(r: &SuiteReport) -> String {
    format!("{} passed, {} failed, {} skipped", r.passed, r.failed, r.skipped)
}

fn projected_ball_suite() -> Outcome {
    let (r, t) = timed_suite("lemma-3.2", 200);
    let angle = r.max_residual("axis_angle").unwrap_or(f64::NAN);
    let pass = r.ok() && r.records.len() == 200 && angle <= 1e-6 && dims(&r) == [3, 4] && t.as_secs_f64() < 30.0;
    outcome(pass, format!("{}, max angle {angle:.2e}, {:.1} s", counts(&r), t.as_secs_f64()))
}

fn revolution_shadow_suite() -> Outcome {
    let (r, t) = timed_suite("lemma-3.3", 50);
    let residual = r.max_residual("prediction_residual").unwrap_or(f64::NAN);
    let parallel = r.records.iter().filter(|t| t.params.get("case").and_then(|c| c.as_str()) == Some("parallel")).count();
    let pass = r.ok() && r.failed == 0 && residual <= 1e-3 && dims(&r) == [4] && parallel > 0;
    outcome(
        pass,
        format!("{}, max residual {residual:.2e}, {parallel} parallel cases, {:.1} s", counts(&r), t.as_secs_f64()),
    )
}

fn shadow_boundary_suites() -> Outcome {
    let (planar, t1) = timed_suite("lemma-3.4-planarity", 50);
    let (contra, t2) = timed_suite("lemma-3.4-contrapositive", 50);
    let flat = planar.max_residual("planarity").unwrap_or(f64::NAN);
    let round = contra.min_residual("ellipsoid_residual").unwrap_or(f64::NAN);
    let all_done = |r: &SuiteReport| r.records.iter().all(|t| t.status == TrialStatus::Pass);
    let pass = planar.ok() && contra.ok() && all_done(&contra) && flat <= 5e-3 && round >= 1e-2;
    outcome(
        pass,
        format!(
            "planarity {} max {flat:.2e}; contrapositive {} min residual {round:.3}, {:.1} s",
            counts(&planar),
            counts(&contra),
            (t1 + t2).as_secs_f64()
        ),
    )
}

fn axis_compatibility_suite() -> Outcome {
    let (r, t) = timed_suite("lemma-3.5", 20);
    let angle = r.max_residual("projected_axis_angle").unwrap_or(f64::NAN);
    let normal = r.max_residual("normal_l2_cos").unwrap_or(f64::NAN);
    let pass = r.ok() && angle <= 2e-2 && normal <= 1e-6 && dims(&r) == [5] && t.as_secs_f64() < 300.0;
    outcome(
        pass,
        format!("{}, max angle {angle:.2e}, max |cos(N, l2)| {normal:.1e}, {:.1} s", counts(&r), t.as_secs_f64()),
    )
}

fn ellipsoid_criterion() -> Outcome {
    let q = DVector::from_vec(vec![1.0, 3.0, 0.4]);
    let a = conditioned_matrix(&mut rng(5), 3, 10.0);
    let ell = Ellipsoid::from_inverse_shape(DVector::zeros(3), &a * nalgebra::DMatrix::from_diagonal(&q) * a.transpose()).unwrap();
    let scan = scan_projection_field(&ConvexBody::ellipsoid(ell), &ScanOptions { seed: 1, ..ScanOptions::default() }).unwrap();
    let round = scan.shadows.iter().all(|s| s.is_ellipsoid && s.ellipsoid_residual <= 1e-6);
    let (e_res, e_pair) = (scan.max_ellipsoid_residual(), scan.max_pairwise());

    let mut directions = vec![e(3, 2), v(&[1.0, 1.0, 1.0]).normalize()];
    directions.extend(dense_dirs(3, 6, 0).into_iter().map(|u| (u + v(&[0.1, 0.2, 0.3])).normalize()));
    let cube = shapes::cube(3);
    let opts = ScanOptions { directions: Some(directions), axes: false, ..ScanOptions::default() };
    let scan = scan_projection_field(&cube, &opts).unwrap();
    let oblique = scan.shadows.iter().map(|s| s.ellipsoid_residual).fold(0.0, f64::max);
    let flagged = scan.shadows.iter().any(|s| !s.is_ellipsoid && s.ellipsoid_residual >= 0.05);
    let c_pair = scan.max_pairwise();

    // reference: the square shadow has canonical residual 1 - 1/sqrt 2
    let square = 1.0 - 1.0 / 2f64.sqrt();
    let (suite, t) = timed_suite("thm-4-ellipsoid-criterion", 20);
    let pass = round && e_pair <= 1e-6 && flagged && oblique >= square - 1e-3 && c_pair >= 0.1 && suite.ok();
    outcome(
        pass,
        format!(
            "ellipsoid: max residual {e_res:.1e}, max pairwise {e_pair:.1e}; cube: max residual {oblique:.3} \
             (oracle {square:.3}), max pairwise {c_pair:.3}; suite {}, {:.1} s",
            counts(&suite),
            t.as_secs_f64()
        ),
    )
}

fn axis_recovery() -> Outcome {
    let mut worst = 0.0f64;
    let mut missing = 0;
    for seed in 0..50u64 {
        let n = 3 + (seed % 2) as usize;
        let mut g = rng(1000 + seed);
        let spec = BodySpec::AffineImage {
            inner: Box::new(BodySpec::Revolution {
                dim: n,
                profile: Profile::RandomConcave { knots: 3 },
                axis: Some(unit_vector(&mut g, n).iter().copied().collect()),
            }),
            matrix: None,
            max_cond: Some(20.0),
            translation: None,
        };
        let got = generate(&spec, seed).unwrap();
        let planted = got.axis.unwrap().direction();
        match affine_revolution_axis(&got.body).unwrap() {
            Some(c) if !c.degenerate => worst = worst.max(line_angle(&c.axis.direction(), &planted)),
            _ => missing += 1,
        }
    }
    let cube = shapes::cube(3);
    let mut false_axes = usize::from(revolution_axis(&cube).unwrap().is_some())
        + usize::from(affine_revolution_axis(&cube).unwrap().is_some());
    for seed in 0..5 {
        let body = generate(&BodySpec::AsymmetricProfile { dim: 3, layers: 4 }, seed).unwrap().body;
        false_axes += usize::from(revolution_axis(&body).unwrap().is_some());
        false_axes += usize::from(affine_revolution_axis(&body).unwrap().is_some());
    }
    outcome(
        missing == 0 && worst <= 1e-2 && false_axes == 0,
        format!("50 images: {missing} missed, max angle {worst:.2e}; {false_axes} axes reported for cube and asymmetric bodies"),
    )
}

fn determinism() -> Outcome {
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_shadowgeom")).args(args).output().unwrap();
    let mut same = true;
    let mut bytes = 0;
    for args in [
        ["verify", "lemma-3.2", "--seed", "1", "--trials", "50"],
        ["verify", "cor-2.2-consistency", "--seed", "1", "--trials", "5"],
        ["verify", "lemma-3.4-contrapositive", "--seed", "9", "--trials", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        same &= a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
        bytes += a.stdout.len();
    }
    outcome(same, format!("3 commands run twice, {bytes} bytes compared"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("enclosing ellipsoid correctness", mvee_correctness),
        ("enclosing ellipsoid affine equivariance", mvee_equivariance),
        ("canonical-reduction equivalence", canonical_reduction),
        ("projected ball axis suite", projected_ball_suite),
        ("revolution shadow suite", revolution_shadow_suite),
        ("shadow boundary suites", shadow_boundary_suites),
        ("axis compatibility suite in R^5", axis_compatibility_suite),
        ("ellipsoid criterion", ellipsoid_criterion),
        ("axis recovery", axis_recovery),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
