//! Bodies known through samples `(u_i, h(u_i))` of their support function.
//!
//! Values between samples come from a local cubic model of the
//! 1-homogeneous extension of `h` on the tangent plane at the query
//! direction. The model's gradient is the touching point, and its fit
//! residual flags kinks of `h` (faces of the body).

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::linalg::complement_of_vector;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSample {
    directions: Vec<DVector<f64>>,
    values: Vec<f64>,
}

/// Local model of the support function around one direction.
#[derive(Debug, Clone)]
pub struct LocalFit {
    pub value: f64,
    pub touching_point: DVector<f64>,
    /// Largest fit residual divided by the neighborhood radius; of the order
    /// of the gradient jump across a kink, small for smooth `h`.
    pub kink: f64,
}

impl SupportSample {
    pub fn new(directions: Vec<DVector<f64>>, values: Vec<f64>) -> Result<Self> {
        if directions.len() != values.len() {
            return Err(GeomError::InvalidArgument(
                "support sample: direction/value count mismatch".into(),
            ));
        }
        let Some(first) = directions.first() else {
            return Err(GeomError::DegenerateBody("empty support sample".into()));
        };
        let dim = first.len();
        if directions.len() < 2 * dim {
            return Err(GeomError::DegenerateBody(format!(
                "support sample needs at least {} directions",
                2 * dim
            )));
        }
        let mut dirs = Vec::with_capacity(directions.len());
        for (u, h) in directions.into_iter().zip(&values) {
            if u.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: u.len(),
                });
            }
            if !h.is_finite() || !u.iter().all(|x| x.is_finite()) {
                return Err(GeomError::NonFinite("support sample".into()));
            }
            let n = u.norm();
            if (n - 1.0).abs() > 1e-9 {
                return Err(GeomError::InvalidArgument(format!(
                    "support sample direction has norm {n}"
                )));
            }
            dirs.push(u / n);
        }
        Ok(Self {
            directions: dirs,
            values,
        })
    }

    /// Samples `h` at the given unit directions.
    pub fn from_fn(directions: Vec<DVector<f64>>, h: impl Fn(&DVector<f64>) -> f64) -> Result<Self> {
        let values = directions.iter().map(&h).collect();
        Self::new(directions, values)
    }

    pub fn dim(&self) -> usize {
        self.directions[0].len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn directions(&self) -> &[DVector<f64>] {
        &self.directions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.fit(u).value
    }

    fn nearest(&self, u: &DVector<f64>, k: usize) -> Vec<(f64, usize)> {
        let mut dots: Vec<(f64, usize)> = self
            .directions
            .iter()
            .enumerate()
            .map(|(i, v)| (v.dot(u), i))
            .collect();
        let k = k.min(dots.len());
        dots.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0));
        dots.truncate(k);
        dots.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        dots
    }

    pub fn fit(&self, u: &DVector<f64>) -> LocalFit {
        let d = self.dim();
        if d == 1 {
            let best = self.nearest(u, 1)[0].1;
            let value = self.values[best] * self.directions[best][0] * u[0];
            return LocalFit {
                value,
                touching_point: u * value,
                kink: 0.0,
            };
        }
        let m = d - 1;
        let n_lin = 1 + m;
        let n_cubic = monomial_count(m, 3);
        let k_want = n_cubic + 2 * d;
        let neigh = self.nearest(u, k_want);
        let exact = (neigh[0].0 >= 1.0 - 1e-14).then(|| self.values[neigh[0].1]);

        let t = complement_of_vector(u);
        let mut s_rows = Vec::with_capacity(neigh.len());
        let mut g = Vec::with_capacity(neigh.len());
        for &(c, i) in &neigh {
            if c <= 0.05 {
                continue;
            }
            s_rows.push(t.transpose() * &self.directions[i] / c);
            g.push(self.values[i] / c);
        }
        let rho = s_rows.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if s_rows.len() < n_lin + 1 || rho == 0.0 {
            let value = exact.unwrap_or(g.first().copied().unwrap_or(0.0));
            return LocalFit {
                value,
                touching_point: u * value,
                kink: 0.0,
            };
        }
        let degree = (1..=3)
            .rev()
            .find(|&deg| s_rows.len() >= monomial_count(m, deg) + 2)
            .unwrap_or(1);
        let ncols = monomial_count(m, degree);
        let mut a = DMatrix::zeros(s_rows.len(), ncols);
        for (r, s) in s_rows.iter().enumerate() {
            let sig = s / rho;
            let row = monomials(&sig, degree);
            for (c, v) in row.into_iter().enumerate() {
                a[(r, c)] = v;
            }
        }
        let b = DVector::from_vec(g);
        let coef = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-12)
            .expect("svd with u and v computed");
        let resid = &a * &coef - &b;
        let grad = DVector::from_iterator(m, (0..m).map(|j| coef[1 + j] / rho));
        let value = exact.unwrap_or(coef[0]);
        LocalFit {
            value,
            touching_point: u * value + &t * grad,
            kink: resid.amax() / rho,
        }
    }

    /// Touching points at every sample direction.
    pub fn touching_points(&self) -> Vec<DVector<f64>> {
        self.directions
            .iter()
            .map(|u| self.fit(u).touching_point)
            .collect()
    }
}

fn monomial_count(m: usize, degree: usize) -> usize {
    // binomial(m + degree, degree)
    (1..=degree).fold(1, |acc, k| acc * (m + k) / k)
}

/// Monomials of total degree at most `degree`, ordered by degree: the
/// constant first, then the `m` linear terms.
fn monomials(x: &DVector<f64>, degree: usize) -> Vec<f64> {
    let m = x.len();
    let mut out = vec![1.0];
    let mut prev: Vec<(f64, usize)> = vec![(1.0, 0)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for &(v, start) in &prev {
            for j in start..m {
                next.push((v * x[j], j));
            }
        }
        out.extend(next.iter().map(|p| p.0));
        prev = next;
    }
    out
}
