//! Deterministic direction sets and seeded random streams.
//!
//! Every direction set is a pure function of `(dim, count, seed)`:
//! a rotated Fibonacci lattice on S², a seeded-offset uniform grid on S¹,
//! and normalized Gaussian draws in dimension four and up.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{random_orthogonal, random_unit};

/// Independent random stream `index` of the generator seeded with `seed`.
pub fn derive_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn circle(count: usize, offset: f64) -> Vec<DVector<f64>> {
    (0..count)
        .map(|i| {
            let t = offset + std::f64::consts::TAU * i as f64 / count as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect()
}

fn fibonacci(count: usize) -> Vec<DVector<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// `count` unit vectors in R^dim, deterministic in `seed`.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    assert!(dim >= 1 && count >= 1);
    let mut rng = derive_rng(seed, 0x5350_4845);
    match dim {
        1 => (0..count)
            .map(|i| DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect(),
        2 => {
            let offset = rng.random::<f64>() * std::f64::consts::TAU / count as f64;
            circle(count, offset)
        }
        3 => {
            let rot = random_orthogonal(&mut rng, 3, 1.0);
            fibonacci(count).into_iter().map(|v| &rot * v).collect()
        }
        _ => (0..count).map(|_| random_unit(&mut rng, dim)).collect(),
    }
}

/// Antipodally closed direction set of size `2 * half`.
pub fn antipodal_directions(dim: usize, half: usize, seed: u64) -> Vec<DVector<f64>> {
    let base = sphere_directions(dim, half, seed);
    let mut out = Vec::with_capacity(2 * half);
    for v in base {
        out.push(-&v);
        out.push(v);
    }
    out
}

/// `count` unit representatives of lines through the origin (one per
/// antipodal pair), for searches over axes.
pub fn projective_directions(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    match dim {
        2 => {
            let mut rng = derive_rng(seed, 0x5350_4845);
            let offset = rng.random::<f64>() * std::f64::consts::PI / count as f64;
            (0..count)
                .map(|i| {
                    let t = offset + std::f64::consts::PI * i as f64 / count as f64;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                })
                .collect()
        }
        3 => fibonacci(2 * count)
            .into_iter()
            .take(count)
            .collect(),
        _ => sphere_directions(dim, count, seed)
            .into_iter()
            .map(|v| crate::linalg::canonical_sign(&v))
            .collect(),
    }
}

/// Directions including the coordinate axes and their negations, followed
/// by a seeded sphere sample. Used where residual maxima are known to sit on
/// coordinate directions for axis-aligned test bodies.
pub fn directions_with_axes(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count + 2 * dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        out.push(-&e);
        out.push(e);
    }
    out.extend(sphere_directions(dim, count, seed));
    out
}
