mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use shadowgeom::equivalence::{
    affine_equivalent, central_symmetry_center, linear_equivalent, EquivalenceVerdict,
};
use shadowgeom::geometry::{shapes, support_distance, ConvexBody, Ellipsoid};
use shadowgeom::GeomError;

const TOL: f64 = 1e-3;

fn random_symmetric(seed: u64, n: usize, m: usize) -> ConvexBody {
    let mut r = rng(seed);
    let pts = (0..m).map(|_| gaussian_vector(&mut r, n)).collect();
    ConvexBody::symmetric_point_cloud(pts).unwrap()
}

fn orthogonality_defect(v: &EquivalenceVerdict) -> f64 {
    let w = &v.alignment;
    let n = w.nrows();
    (w.transpose() * w - DMatrix::<f64>::identity(n, n)).amax()
}

fn witness_gap(k1: &ConvexBody, k2: &ConvexBody, v: &EquivalenceVerdict) -> f64 {
    let image = k1.affine_image(&v.witness).unwrap();
    support_distance(&image, k2, &dense_dirs(k1.dim(), 500, 3)).unwrap()
}

#[test]
fn symmetry_centers_of_standard_bodies() {
    let (c, r) = central_symmetry_center(&shapes::cross_polytope(3)).unwrap();
    assert!(c.norm() <= 1e-10 && r <= 1e-10);

    let t = v(&[0.3, -1.2, 2.0]);
    let ball = ConvexBody::unit_ball(3).translated(&t).unwrap();
    let (c, r) = central_symmetry_center(&ball).unwrap();
    assert!((c - &t).norm() <= 1e-8 && r <= 1e-8);

    // reference: best center over a fine grid in the triangle, each scored
    // on a dense circle of directions
    let tri = [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let dirs = circle_dirs(720);
    let g: Vec<f64> = dirs.iter().map(|u| hull_support(&tri, u) - hull_support(&tri, &-u)).collect();
    let mut oracle = f64::INFINITY;
    let steps = 200;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let c = v(&[i as f64 / steps as f64, j as f64 / steps as f64]);
            let worst = dirs
                .iter()
                .zip(&g)
                .map(|(u, gi)| (gi - 2.0 * c.dot(u)).abs())
                .fold(0.0, f64::max);
            oracle = oracle.min(worst);
        }
    }
    assert!(oracle > 0.05, "grid oracle {oracle}");
    let (_, r) = central_symmetry_center(&shapes::triangle()).unwrap();
    assert!(r > 0.05);
    assert!(r >= oracle - 1e-2, "library {r} vs oracle {oracle}");
}

#[test]
fn rotated_cube_is_linearly_equivalent() {
    let mut g = rng(21);
    let cube = shapes::cube(3);
    for _ in 0..5 {
        let r = haar_orthogonal(&mut g, 3);
        let turned = cube.linear_image(&r).unwrap();
        let v = linear_equivalent(&cube, &turned, TOL, 50).unwrap();
        assert!(v.equivalent && v.residual <= 1e-6, "residual {}", v.residual);
        assert!(witness_gap(&cube, &turned, &v) <= 1e-6);
        // the witness is R up to a symmetry of the cube
        let s = r.transpose() * &v.witness.matrix;
        assert!(s.iter().all(|x| x.abs() < 1e-5 || (x.abs() - 1.0).abs() < 1e-5));
    }
}

#[test]
fn balls_and_ellipsoids_are_equivalent() {
    let q = DMatrix::from_row_slice(3, 3, &[3.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.5]);
    let e = ConvexBody::ellipsoid(Ellipsoid::new(DVector::zeros(3), q.clone()).unwrap());
    let verdict = linear_equivalent(&ConvexBody::unit_ball(3), &e, TOL, 50).unwrap();
    assert!(verdict.equivalent && verdict.residual <= 1e-6);

    let moved = ConvexBody::unit_ball(3).translated(&v(&[1.0, 2.0, -3.0])).unwrap();
    let e = ConvexBody::ellipsoid(Ellipsoid::new(v(&[-1.0, 0.0, 0.5]), q).unwrap());
    let verdict = affine_equivalent(&moved, &e, TOL, 50).unwrap();
    assert!(verdict.equivalent && verdict.residual <= 1e-6);
}

#[test]
fn cube_and_cross_polytope_are_not_equivalent() {
    // reference: both canonical forms have their vertices on the unit sphere
    // (cube / sqrt 3 and the cross-polytope itself). Sample the orthogonal
    // group densely and score each rotation on exact vertex supports.
    let cube: Vec<_> = cube_vertices(3).iter().map(|x| x / 3f64.sqrt()).collect();
    let cross = cross_vertices(3);
    let dirs = spiral_dirs(300);
    let cross_h: Vec<f64> = dirs.iter().map(|u| hull_support(&cross, u)).collect();
    let mut g = rng(99);
    let mut oracle = f64::INFINITY;
    for _ in 0..100_000 {
        let q = haar_orthogonal(&mut g, 3);
        let turned: Vec<_> = cube.iter().map(|x| &q * x).collect();
        let mut worst = 0.0f64;
        for (u, hc) in dirs.iter().zip(&cross_h) {
            worst = worst.max((hull_support(&turned, u) - hc).abs());
            if worst >= oracle {
                break;
            }
        }
        oracle = oracle.min(worst);
    }
    assert!(oracle >= 0.15, "sampling oracle {oracle}");

    let v = linear_equivalent(&shapes::cube(3), &shapes::cross_polytope(3), TOL, 50).unwrap();
    assert!(!v.equivalent);
    assert!(v.residual >= 0.15, "residual {}", v.residual);
    assert!(v.restarts_used >= 1 && v.restarts_used <= 50);
}

#[test]
fn square_and_triangle_are_not_affinely_equivalent() {
    // reference: canonical square has vertices on the unit circle, the
    // canonical triangle is equilateral and inscribed in it; scan rotations
    // and reflections of the square on a fine angle grid
    let tri: Vec<_> = (0..3)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 3.0;
            v(&[t.cos(), t.sin()])
        })
        .collect();
    let dirs = circle_dirs(1440);
    let mut oracle = f64::INFINITY;
    for reflect in [1.0, -1.0] {
        for i in 0..3600 {
            let theta = std::f64::consts::TAU * i as f64 / 3600.0;
            let sq: Vec<_> = (0..4)
                .map(|k| {
                    let t = theta + std::f64::consts::FRAC_PI_2 * k as f64;
                    v(&[t.cos(), reflect * t.sin()])
                })
                .collect();
            let worst = dirs
                .iter()
                .map(|u| (hull_support(&sq, u) - hull_support(&tri, u)).abs())
                .fold(0.0, f64::max);
            oracle = oracle.min(worst);
        }
    }
    assert!(oracle >= 0.1, "grid oracle {oracle}");

    let v = affine_equivalent(&shapes::cube(2), &shapes::triangle(), TOL, 50).unwrap();
    assert!(!v.equivalent);
    assert!(v.residual >= 0.1, "residual {}", v.residual);
}

#[test]
fn affine_images_are_affinely_equivalent() {
    let mut g = rng(4);
    let tri = shapes::triangle();
    for _ in 0..5 {
        let a = conditioned_matrix(&mut g, 2, 10.0);
        let t = gaussian_vector(&mut g, 2);
        let image = tri.linear_image(&a).unwrap().translated(&t).unwrap();
        let v = affine_equivalent(&tri, &image, TOL, 50).unwrap();
        assert!(v.equivalent && v.residual <= 1e-5, "residual {}", v.residual);
    }
    let k = random_symmetric(8, 3, 7).translated(&v(&[1.0, -2.0, 0.5])).unwrap();
    let a = conditioned_matrix(&mut g, 3, 10.0);
    let image = k.linear_image(&a).unwrap().translated(&v(&[0.0, 3.0, 1.0])).unwrap();
    let v = affine_equivalent(&k, &image, TOL, 50).unwrap();
    assert!(v.equivalent && v.residual <= 1e-5, "residual {}", v.residual);
}

#[test]
fn verdicts_are_symmetric_on_a_corpus() {
    let mut g = rng(12);
    let a = conditioned_matrix(&mut g, 3, 5.0);
    let corpus = vec![
        shapes::cube(3),
        shapes::cross_polytope(3),
        ConvexBody::unit_ball(3),
        shapes::cube(3).linear_image(&a).unwrap(),
        random_symmetric(2, 3, 6),
    ];
    for (i, k1) in corpus.iter().enumerate() {
        for k2 in &corpus[i + 1..] {
            let ab = linear_equivalent(k1, k2, TOL, 20).unwrap();
            let ba = linear_equivalent(k2, k1, TOL, 20).unwrap();
            assert_eq!(ab.equivalent, ba.equivalent);
            assert!(orthogonality_defect(&ab) <= 1e-8);
        }
    }
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let err = linear_equivalent(&shapes::cube(2), &shapes::cube(3), TOL, 5).unwrap_err();
    assert!(matches!(err, GeomError::DimensionMismatch { .. }));
    let err = affine_equivalent(&shapes::cube(3), &shapes::triangle(), TOL, 5).unwrap_err();
    assert!(matches!(err, GeomError::DimensionMismatch { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_body_is_equivalent_to_itself(seed in any::<u64>(), n in 2usize..5, extra in 0usize..6) {
        let k = random_symmetric(seed, n, n + extra);
        let v = linear_equivalent(&k, &k, TOL, 10).unwrap();
        prop_assert!(v.equivalent);
        prop_assert!(v.residual <= 1e-10, "residual {}", v.residual);
    }

    #[test]
    fn planted_linear_maps_are_recovered(seed in any::<u64>(), n in 2usize..5, extra in 0usize..6) {
        let k = random_symmetric(seed, n, n + extra);
        let mut g = rng(seed ^ 5);
        let a = conditioned_matrix(&mut g, n, 20.0);
        let image = k.linear_image(&a).unwrap();
        let v = linear_equivalent(&k, &image, TOL, 50).unwrap();
        prop_assert!(v.equivalent, "residual {}", v.residual);
        prop_assert!(orthogonality_defect(&v) <= 1e-8);
        let scale = image.diameter();
        prop_assert!(witness_gap(&k, &image, &v) <= 1e-2 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verdicts_survive_pre_applied_affine_maps(seed in any::<u64>(), n in 2usize..4) {
        let mut g = rng(seed);
        let k1 = random_symmetric(seed, n, n + 3);
        let planted = k1.linear_image(&conditioned_matrix(&mut g, n, 10.0)).unwrap();
        let other = if n == 2 { shapes::cube(2) } else { shapes::cross_polytope(3) };
        let b = conditioned_matrix(&mut g, n, 50.0);
        let t = gaussian_vector(&mut g, n);
        let moved = k1.linear_image(&b).unwrap().translated(&t).unwrap();
        for k2 in [&planted, &other] {
            let before = affine_equivalent(&k1, k2, TOL, 50).unwrap();
            let after = affine_equivalent(&moved, k2, TOL, 50).unwrap();
            prop_assert_eq!(before.equivalent, after.equivalent);
            prop_assert!((before.residual - after.residual).abs() <= 10.0 * TOL);
        }
    }
}
