//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GeomError, Result};

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt with one
/// re-orthogonalization pass). Fails when a column is dependent on the
/// previous ones.
pub fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let mut v = out.column(j).into_owned();
        let scale = v.norm();
        for _ in 0..2 {
            for i in 0..j {
                let q = out.column(i);
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        let n = v.norm();
        if n <= 1e-10 * scale.max(1e-300) || n == 0.0 {
            return Err(GeomError::InvalidSubspace(format!(
                "column {j} is linearly dependent"
            )));
        }
        out.set_column(j, &(v / n));
    }
    Ok(out)
}

/// Orthonormal basis (as columns) of the orthogonal complement of the span
/// of the orthonormal columns of `basis`.
///
/// Deterministic: standard basis vectors are added greedily by largest
/// residual norm.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let k = basis.ncols();
    let mut cols: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let mut added = Vec::with_capacity(n - k);
    let mut used = vec![false; n];
    while cols.len() < n {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for q in &cols {
                    let c = q.dot(&v);
                    v -= q * c;
                }
            }
            let r = v.norm();
            if best.as_ref().map_or(true, |b| r > b.2 + 1e-14) {
                best = Some((i, v, r));
            }
        }
        let (i, v, r) = best.expect("complement exists while cols.len() < n");
        used[i] = true;
        let v = v / r;
        cols.push(v.clone());
        added.push(v);
    }
    if added.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&added)
}

/// Orthonormal basis of `u`'s orthogonal complement, `u` nonzero.
pub fn complement_of_vector(u: &DVector<f64>) -> DMatrix<f64> {
    let b = DMatrix::from_columns(&[u.normalize()]);
    orthogonal_complement(&b)
}

pub fn identity(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = DMatrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    symmetrize(&(v * DMatrix::from_diagonal(&d) * v.transpose()))
}

pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| x.max(0.0).sqrt())
}

pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| 1.0 / x.sqrt())
}

pub fn sym_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| 1.0 / x)
}

/// Ratio of extreme eigenvalues of a symmetric positive-definite matrix.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// Number of skew-symmetric parameters in dimension `n`.
pub fn skew_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Skew-symmetric matrix from its strictly-upper-triangular entries.
pub fn skew_from_params(params: &[f64], n: usize) -> DMatrix<f64> {
    debug_assert_eq!(params.len(), skew_dim(n));
    let mut s = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s[(i, j)] = params[k];
            s[(j, i)] = -params[k];
            k += 1;
        }
    }
    s
}

/// Cayley transform `(I - S/2)^{-1} (I + S/2)`, orthogonal for skew `S`.
pub fn cayley(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let half = s * 0.5;
    let a = identity(n) - &half;
    let b = identity(n) + &half;
    a.lu().solve(&b).expect("I - S/2 is invertible for skew S")
}

/// Haar-distributed orthogonal matrix with the requested determinant sign.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize, det_sign: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let c = -q.column(j).into_owned();
            q.set_column(j, &c);
        }
    }
    if q.determinant() * det_sign < 0.0 {
        let c = -q.column(0).into_owned();
        q.set_column(0, &c);
    }
    q
}

/// Random invertible matrix with condition number at most `max_cond`:
/// `U diag(s) V^T` with log-uniform singular values in `[1, max_cond]`.
pub fn random_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, max_cond: f64) -> DMatrix<f64> {
    let u = random_orthogonal(rng, n, 1.0);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let v = random_orthogonal(rng, n, sign);
    let lk = max_cond.ln();
    let mut s: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * lk).exp()).collect();
    // pin the extremes so the spread is actually exercised
    if n >= 2 {
        s[0] = 1.0;
        s[1] = max_cond.min((0.5 + 0.5 * rng.random::<f64>()) * max_cond);
    }
    u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Acute angle between the lines spanned by `a` and `b`, in radians.
pub fn line_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a.normalize();
    let mut b = b.normalize();
    if a.dot(&b) < 0.0 {
        b = -b;
    }
    2.0 * (&a - &b).norm().atan2((&a + &b).norm())
}

/// Sign convention for unsigned directions: first coordinate with
/// magnitude above 1e-12 is made positive.
pub fn canonical_sign(v: &DVector<f64>) -> DVector<f64> {
    for x in v.iter() {
        if x.abs() > 1e-12 {
            return if *x < 0.0 { -v.clone() } else { v.clone() };
        }
    }
    v.clone()
}

/// Largest absolute entry of `W^T W - I`.
pub fn orthogonality_defect(w: &DMatrix<f64>) -> f64 {
    let n = w.ncols();
    (w.transpose() * w - identity(n)).amax()
}

/// Nearest orthogonal matrix (polar factor).
pub fn nearest_orthogonal(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    u * vt
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let u = DVector::from_vec(vec![1.0, 2.0, -0.5, 0.3]);
        let c = complement_of_vector(&u);
        assert_eq!(c.ncols(), 3);
        assert!(orthogonality_defect(&c) < 1e-13);
        for col in c.column_iter() {
            assert!(col.dot(&u).abs() < 1e-13);
        }
    }

    #[test]
    fn cayley_is_orthogonal() {
        let s = skew_from_params(&[0.3, -1.2, 0.7], 3);
        assert!(orthogonality_defect(&cayley(&s)) < 1e-13);
    }

    #[test]
    fn random_orthogonal_respects_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..6 {
            for sign in [1.0, -1.0] {
                let q = random_orthogonal(&mut rng, n, sign);
                assert!(orthogonality_defect(&q) < 1e-12);
                assert!((q.determinant() - sign).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn conditioned_matrices_stay_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random_conditioned(&mut rng, 4, 50.0);
            assert!(condition_number(&a) <= 50.0 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn line_angle_is_unsigned_and_accurate() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![-1.0, 1e-9]);
        assert!((line_angle(&a, &b) - 1e-9).abs() < 1e-20);
        let c = DVector::from_vec(vec![0.0, 3.0]);
        assert!((line_angle(&a, &c) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sign_convention() {
        let v = DVector::from_vec(vec![0.0, -2.0, 1.0]);
        assert_eq!(canonical_sign(&v)[1], 2.0);
    }
}
