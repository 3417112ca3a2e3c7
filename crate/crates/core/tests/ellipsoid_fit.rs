mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

use shadowgeom::fit::{body_mvee, canonicalize, is_ellipsoid, mvee, DEFAULT_EPS};
use shadowgeom::geometry::{shapes, support_distance, ConvexBody, Ellipsoid};
use shadowgeom::GeomError;

const EPS: f64 = DEFAULT_EPS;

fn gauge(e: &Ellipsoid, x: &DVector<f64>) -> f64 {
    let d = x - e.center();
    d.dot(&(e.shape() * &d))
}

fn random_points(seed: u64, n: usize, m: usize) -> Vec<DVector<f64>> {
    let mut r = rng(seed);
    (0..m).map(|_| gaussian_vector(&mut r, n)).collect()
}

#[test]
fn cross_polytope_fits_the_unit_ball() {
    let r = mvee(&cross_vertices(3), EPS, true).unwrap();
    assert!((r.ellipsoid.shape() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-6);
    assert!(r.ellipsoid.center().norm() == 0.0);
    assert!(r.dual_gap >= 0.0 && r.dual_gap <= EPS);
}

#[test]
fn square_fits_the_disk_of_radius_sqrt2() {
    let square = vec![v(&[1.0, 1.0]), v(&[1.0, -1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])];
    let r = mvee(&square, EPS, true).unwrap();
    assert!((r.ellipsoid.shape() - DMatrix::<f64>::identity(2, 2) * 0.5).amax() < 1e-6);
    assert!(r.dual_gap <= EPS);
    // reference: largest det Q over a grid of centered ellipses x^T Q x <= 1
    // containing the square (smallest area = largest det)
    let mut best = 0.0f64;
    let steps = 120;
    for i in 1..=steps {
        let a = i as f64 / steps as f64;
        for j in 1..=steps {
            let c = j as f64 / steps as f64;
            for k in 0..=steps {
                let b = -0.5 + k as f64 / steps as f64;
                let det = a * c - b * b;
                if det <= best {
                    continue;
                }
                let fits = square
                    .iter()
                    .all(|p| a * p[0] * p[0] + 2.0 * b * p[0] * p[1] + c * p[1] * p[1] <= 1.0 + 1e-12);
                if fits {
                    best = det;
                }
            }
        }
    }
    assert!((best - 0.25).abs() < 1e-12, "grid optimum {best}");
    let det = r.ellipsoid.shape().determinant();
    assert!(det >= best * (1.0 - 1e-6));
}

#[test]
fn image_of_cross_polytope_fits_image_of_ball() {
    let mut r = rng(11);
    for _ in 0..10 {
        let a = conditioned_matrix(&mut r, 3, 20.0);
        let pts: Vec<_> = cross_vertices(3).iter().map(|p| &a * p).collect();
        let fit = mvee(&pts, EPS, true).unwrap();
        let expected = Ellipsoid::from_inverse_shape(DVector::zeros(3), &a * a.transpose()).unwrap();
        let dirs = spiral_dirs(500);
        let d = dirs
            .iter()
            .map(|u| (fit.ellipsoid.support(u) - ellipsoid_support(&DVector::zeros(3), expected.shape(), u)).abs())
            .fold(0.0, f64::max);
        assert!(d <= 1e-5, "support gap {d}");
    }
}

#[test]
fn rank_deficient_points_are_rejected() {
    let pts = vec![v(&[1.0, 2.0, 0.0]), v(&[-1.0, 0.5, 0.0]), v(&[0.3, -1.0, 0.0]), v(&[2.0, 1.0, 0.0])];
    assert_eq!(mvee(&pts, EPS, false).unwrap_err(), GeomError::PointsDoNotSpan);
    assert_eq!(mvee(&pts, EPS, true).unwrap_err(), GeomError::PointsDoNotSpan);
}

#[test]
fn thin_point_sets_are_flagged_ill_conditioned() {
    let pts = vec![v(&[1.0, 0.0]), v(&[0.0, 1e-5]), v(&[-1.0, 0.0]), v(&[0.0, -1e-5])];
    let r = mvee(&pts, EPS, true).unwrap();
    assert!(r.ill_conditioned);
    assert!(!mvee(&cross_vertices(2), EPS, true).unwrap().ill_conditioned);
}

#[test]
fn canonical_forms_of_standard_bodies() {
    let (b, f) = canonicalize(&ConvexBody::unit_ball(3)).unwrap();
    assert!((f.matrix.clone() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    assert!(f.translation.norm() < 1e-12);
    assert!(b.as_ellipsoid().is_some());

    let q = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
    let e = ConvexBody::ellipsoid(Ellipsoid::new(DVector::zeros(3), q.clone()).unwrap());
    let (b, f) = canonicalize(&e).unwrap();
    assert!((f.matrix.transpose() * &f.matrix - &q).amax() < 1e-10);
    assert!((f.matrix.clone() - f.matrix.transpose()).amax() < 1e-10);
    for u in spiral_dirs(200) {
        assert!((b.support(&u) - 1.0).abs() < 1e-10);
    }

    let (b, f) = canonicalize(&shapes::cube(3)).unwrap();
    for x in cube_vertices(3) {
        assert!((f.apply(&x).norm() - 1.0).abs() < 1e-6);
    }
    let scaled = shapes::cube(3).linear_image(&(DMatrix::identity(3, 3) / 3f64.sqrt())).unwrap();
    assert!(support_distance(&b, &scaled, &spiral_dirs(500)).unwrap() < 1e-6);
}

#[test]
fn ellipsoid_recognition_examples() {
    let (yes, r) = is_ellipsoid(&ConvexBody::unit_ball(3), 1e-3).unwrap();
    assert!(yes && r <= 1e-8);

    let mut g = rng(5);
    for n in 2..=4 {
        let a = conditioned_matrix(&mut g, n, 30.0);
        let body = ConvexBody::unit_ball(n).linear_image(&a).unwrap();
        let (yes, r) = is_ellipsoid(&body, 1e-3).unwrap();
        assert!(yes && r <= 1e-6, "dim {n}: residual {r}");
    }

    // reference: against the radius-sqrt(3) ball, the relative gap at e1 is
    // 1 - 1/sqrt(3), and no direction does worse
    let oracle = spiral_dirs(20000)
        .iter()
        .chain(cross_vertices(3).iter())
        .map(|u| 1.0 - hull_support(&cube_vertices(3), u) / 3f64.sqrt())
        .fold(0.0, f64::max);
    assert!((oracle - (1.0 - 1.0 / 3f64.sqrt())).abs() < 1e-12);
    let (yes, r) = is_ellipsoid(&shapes::cube(3), 1e-3).unwrap();
    assert!(!yes);
    assert!((r - oracle).abs() < 1e-3, "cube residual {r}");
}

#[test]
fn smooth_samples_of_ellipsoids_are_recognized() {
    let q = DMatrix::from_diagonal(&v(&[1.0, 4.0, 0.25]));
    let e = Ellipsoid::new(DVector::zeros(3), q).unwrap();
    let body = ConvexBody::ellipsoid(e.clone()).to_point_cloud(4000, 3).unwrap();
    let fit = body_mvee(&body).unwrap().ellipsoid;
    let d = spiral_dirs(500)
        .iter()
        .map(|u| (fit.support(u) - e.support(u)).abs())
        .fold(0.0, f64::max);
    assert!(d < 2e-2, "gap {d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn enclosing_ellipsoid_contains_its_points(seed in any::<u64>(), n in 2usize..5, extra in 1usize..20, centered in any::<bool>()) {
        let pts = random_points(seed, n, n + extra);
        let r = mvee(&pts, EPS, centered).unwrap();
        prop_assert!(r.dual_gap >= 0.0);
        for p in &pts {
            prop_assert!(gauge(&r.ellipsoid, p) <= 1.0 + EPS);
            if centered {
                prop_assert!(gauge(&r.ellipsoid, &-p) <= 1.0 + EPS);
            }
        }
    }

    #[test]
    fn shrunk_ellipsoid_fits_inside_symmetric_bodies(seed in any::<u64>(), n in 2usize..5, extra in 0usize..20) {
        let pts = random_points(seed, n, n + extra);
        let mut all = pts.clone();
        all.extend(pts.iter().map(|p| -p));
        let r = mvee(&pts, EPS, true).unwrap();
        let scale = 1.0 / (n as f64).sqrt();
        for u in dense_dirs(n, 500, seed) {
            let slack = hull_support(&all, &u) - scale * r.ellipsoid.support(&u);
            prop_assert!(slack >= -1e-6, "slack {slack}");
        }
    }

    #[test]
    fn enclosing_ellipsoid_is_affinely_equivariant(seed in any::<u64>(), n in 2usize..5, centered in any::<bool>()) {
        let pts = random_points(seed, n, n + 6);
        let mut g = rng(seed ^ 7);
        let a = conditioned_matrix(&mut g, n, 50.0);
        let t = if centered { DVector::zeros(n) } else { gaussian_vector(&mut g, n) };
        let image: Vec<_> = pts.iter().map(|p| &a * p + &t).collect();
        let lhs = mvee(&image, EPS, centered).unwrap().ellipsoid;
        let base = mvee(&pts, EPS, centered).unwrap().ellipsoid;
        let rhs = base.transformed(&a, &t).unwrap();
        let d = support_distance(&ConvexBody::ellipsoid(lhs), &ConvexBody::ellipsoid(rhs), &dense_dirs(n, 400, seed)).unwrap();
        prop_assert!(d <= 1e-5, "support gap {d}");
    }

    #[test]
    fn canonical_form_is_already_canonical(seed in any::<u64>(), n in 2usize..5, symmetric in any::<bool>()) {
        let pts = random_points(seed, n, n + 6);
        let body = if symmetric {
            ConvexBody::symmetric_point_cloud(pts).unwrap()
        } else {
            ConvexBody::point_cloud(pts, false).unwrap()
        };
        let (canon, _) = canonicalize(&body).unwrap();
        let (_, again) = canonicalize(&canon).unwrap();
        let m = &again.matrix;
        let defect = (m.transpose() * m - DMatrix::<f64>::identity(n, n)).amax();
        prop_assert!(defect <= 1e-5, "orthogonality defect {defect}");
    }

    #[test]
    fn no_enclosing_ellipse_is_smaller(seed in any::<u64>(), m in 3usize..9) {
        let pts = random_points(seed, 2, m);
        prop_assume!(ConvexBody::point_cloud(pts.clone(), false).is_ok());
        let fit = mvee(&pts, EPS, false).unwrap().ellipsoid;
        let mut g = rng(seed ^ 9);
        for _ in 0..2000 {
            let cond = 1.0 + 9.0 * g.random::<f64>();
            let l = conditioned_matrix(&mut g, 2, cond);
            let q = l.transpose() * &l;
            let c = fit.center() + gaussian_vector(&mut g, 2) * 0.3;
            let worst = pts.iter().map(|p| {
                let d = p - &c;
                d.dot(&(&q * &d))
            }).fold(0.0, f64::max);
            let candidate = Ellipsoid::new(c, q / worst).unwrap();
            prop_assert!(candidate.volume() >= fit.volume() * (1.0 - 1e-6));
        }
    }
}
