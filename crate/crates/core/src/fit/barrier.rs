//! Log-barrier Newton method for the enclosing-ellipsoid problem
//! `min -log det Q  s.t.  q_i^T Q q_i <= 1`, in the `n(n+1)/2` entries of
//! `Q`. Used where the dual optimum is not unique (point sets sampled from
//! curved pieces that touch the ellipsoid along whole spheres), which slows
//! the coordinate ascent to sublinear convergence.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

pub(crate) struct BarrierFit {
    /// Shape in the (possibly lifted) coordinates.
    pub q: DMatrix<f64>,
    /// Primal-dual gap `m * mu` of the final central point.
    pub gap: f64,
    pub newton_steps: usize,
}

fn sym_basis(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            out.push((a, b));
        }
    }
    out
}

fn to_matrix(theta: &DVector<f64>, basis: &[(usize, usize)], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (k, &(a, b)) in basis.iter().enumerate() {
        m[(a, b)] = theta[k];
        m[(b, a)] = theta[k];
    }
    m
}

/// Centered problem on the rows of `q` (already lifted when needed).
/// `gap` bounds `m * mu` at the final barrier parameter.
pub(crate) fn solve(q: &[DVector<f64>], gap: f64) -> Result<BarrierFit> {
    let n = q[0].len();
    let m = q.len();
    let basis = sym_basis(n);
    let p = basis.len();
    // g_i(theta) = a_i . theta
    let a: Vec<DVector<f64>> = q
        .iter()
        .map(|v| {
            DVector::from_iterator(
                p,
                basis
                    .iter()
                    .map(|&(i, j)| if i == j { v[i] * v[i] } else { 2.0 * v[i] * v[j] }),
            )
        })
        .collect();
    let r2 = q.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    if !(r2 > 0.0) {
        return Err(GeomError::PointsDoNotSpan);
    }
    let mut theta = DVector::zeros(p);
    for (k, &(i, j)) in basis.iter().enumerate() {
        if i == j {
            theta[k] = 0.5 / r2;
        }
    }
    let slack = |theta: &DVector<f64>| -> Option<Vec<f64>> {
        let s: Vec<f64> = a.iter().map(|ai| 1.0 - ai.dot(theta)).collect();
        s.iter().all(|x| *x > 0.0).then_some(s)
    };
    let phi = |theta: &DVector<f64>, mu: f64| -> Option<f64> {
        let s = slack(theta)?;
        let ch = to_matrix(theta, &basis, n).cholesky()?;
        let logdet: f64 = ch.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
        Some(-logdet - mu * s.iter().map(|x| x.ln()).sum::<f64>())
    };

    let e: Vec<DMatrix<f64>> = basis
        .iter()
        .map(|&(i, j)| {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            e
        })
        .collect();
    let mut mu = 1.0;
    let mut steps = 0;
    loop {
        for _ in 0..100 {
            let qm = to_matrix(&theta, &basis, n);
            let pinv = qm
                .clone()
                .cholesky()
                .ok_or(GeomError::PointsDoNotSpan)?
                .inverse();
            let mut grad = DVector::zeros(p);
            let mut hess = DMatrix::zeros(p, p);
            let pe: Vec<DMatrix<f64>> = e.iter().map(|ek| &pinv * ek).collect();
            for k in 0..p {
                grad[k] = -pe[k].trace();
                for l in k..p {
                    let v = (&pe[k] * &pe[l]).trace();
                    hess[(k, l)] = v;
                    hess[(l, k)] = v;
                }
            }
            let s = slack(&theta).expect("accepted iterates are interior");
            for (ai, si) in a.iter().zip(&s) {
                grad.axpy(mu / si, ai, 1.0);
                hess.ger(mu / (si * si), ai, ai, 1.0);
            }
            let Some(ch) = hess.cholesky() else {
                return Err(GeomError::PointsDoNotSpan);
            };
            let delta = -ch.solve(&grad);
            let decrement = -grad.dot(&delta);
            steps += 1;
            if decrement <= 1e-14 {
                break;
            }
            let f0 = phi(&theta, mu).expect("iterate is interior");
            let mut t = 1.0;
            loop {
                let cand = &theta + &delta * t;
                if let Some(f) = phi(&cand, mu) {
                    if f <= f0 - 0.25 * t * decrement {
                        theta = cand;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            if t < 1e-12 {
                break;
            }
        }
        if mu * m as f64 <= gap {
            break;
        }
        mu *= 0.1;
    }
    Ok(BarrierFit {
        q: to_matrix(&theta, &basis, n),
        gap: mu * m as f64,
        newton_steps: steps,
    })
}
