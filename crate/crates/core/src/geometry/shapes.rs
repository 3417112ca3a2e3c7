//! Standard test bodies.

use nalgebra::DVector;

use super::body::ConvexBody;

/// Cube `[-1, 1]^n` as its `2^n` vertices.
pub fn cube(n: usize) -> ConvexBody {
    let pts = (0..1usize << n)
        .map(|s| DVector::from_fn(n, |i, _| if s >> i & 1 == 1 { 1.0 } else { -1.0 }))
        .collect();
    ConvexBody::point_cloud(pts, true).expect("cube is a valid body")
}

/// Cross-polytope `conv{±e_i}`.
pub fn cross_polytope(n: usize) -> ConvexBody {
    let mut pts = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        pts.push(-&e);
        pts.push(e);
    }
    ConvexBody::point_cloud(pts, true).expect("cross-polytope is a valid body")
}

/// Triangle with vertices `(0,0), (1,0), (0,1)`.
pub fn triangle() -> ConvexBody {
    ConvexBody::point_cloud(
        vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ],
        false,
    )
    .expect("triangle is a valid body")
}
