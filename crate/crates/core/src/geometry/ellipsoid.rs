use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::linalg::{spd_condition, sym_eigen_sorted, sym_inverse};

/// The set `{x : (x - c)^T Q (x - c) <= 1}` with `Q` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    inv_shape: DMatrix<f64>,
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    let n = n as f64;
    std::f64::consts::PI.powf(n / 2.0) / gamma_half_plus_one(n)
}

// Gamma(n/2 + 1) for integer n.
fn gamma_half_plus_one(n: f64) -> f64 {
    let k = n as usize;
    if k % 2 == 0 {
        (1..=k / 2).map(|i| i as f64).product()
    } else {
        // Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!), m = (k + 1) / 2
        let m = (k + 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..m {
            g *= i as f64 + 0.5;
        }
        g
    }
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: shape.nrows(),
            });
        }
        if !center.iter().chain(shape.iter()).all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite("ellipsoid".into()));
        }
        let scale = shape.amax().max(1e-300);
        if (&shape - shape.transpose()).amax() > 1e-12 * scale {
            return Err(GeomError::InvalidArgument(
                "ellipsoid shape matrix is not symmetric".into(),
            ));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let (vals, _) = sym_eigen_sorted(&shape);
        if vals[0] <= 0.0 || !vals[0].is_finite() {
            return Err(GeomError::DegenerateBody(
                "ellipsoid shape matrix is not positive definite".into(),
            ));
        }
        let inv_shape = sym_inverse(&shape);
        Ok(Self {
            center,
            shape,
            inv_shape,
        })
    }

    /// Ellipsoid from the inverse shape `Q^{-1}` (the covariance-like form).
    pub fn from_inverse_shape(center: DVector<f64>, inv_shape: DMatrix<f64>) -> Result<Self> {
        let inv_shape = (&inv_shape + inv_shape.transpose()) * 0.5;
        let (vals, _) = sym_eigen_sorted(&inv_shape);
        if vals[0] <= 0.0 {
            return Err(GeomError::DegenerateBody(
                "inverse shape matrix is not positive definite".into(),
            ));
        }
        let mut e = Self::new(center, sym_inverse(&inv_shape))?;
        e.inv_shape = inv_shape;
        Ok(e)
    }

    pub fn unit_ball(n: usize) -> Self {
        Self {
            center: DVector::zeros(n),
            shape: DMatrix::identity(n, n),
            inv_shape: DMatrix::identity(n, n),
        }
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let n = center.len();
        Self {
            center,
            shape: DMatrix::identity(n, n) / (radius * radius),
            inv_shape: DMatrix::identity(n, n) * (radius * radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn inverse_shape(&self) -> &DMatrix<f64> {
        &self.inv_shape
    }

    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.center.dot(u) + self.radial_support(u)
    }

    /// Support relative to the center: `sqrt(u^T Q^{-1} u)`.
    pub fn radial_support(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.inv_shape * u)).max(0.0).sqrt()
    }

    pub fn touching_point(&self, u: &DVector<f64>) -> DVector<f64> {
        let w = &self.inv_shape * u;
        let r = u.dot(&w).max(0.0).sqrt();
        if r == 0.0 {
            return self.center.clone();
        }
        &self.center + w / r
    }

    /// `(x - c)^T Q (x - c)`; at most one inside the ellipsoid.
    pub fn gauge_squared(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.center;
        d.dot(&(&self.shape * &d))
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) / self.shape.determinant().sqrt()
    }

    /// Image under `x -> A x + t`, `A` square invertible.
    pub fn transformed(&self, a: &DMatrix<f64>, t: &DVector<f64>) -> Result<Self> {
        let inv = a * &self.inv_shape * a.transpose();
        Self::from_inverse_shape(a * &self.center + t, inv)
    }

    /// Semi-axis lengths (ascending) and the matching principal directions.
    pub fn principal_axes(&self) -> (DVector<f64>, DMatrix<f64>) {
        let (vals, vecs) = sym_eigen_sorted(&self.inv_shape);
        (vals.map(|v| v.max(0.0).sqrt()), vecs)
    }

    pub fn condition(&self) -> f64 {
        spd_condition(&self.shape)
    }

    /// Equivalent hull piece `{c + M y : |y| <= 1}` with `M = Q^{-1/2}`.
    pub fn as_piece(&self) -> EllipsoidPiece {
        EllipsoidPiece {
            center: self.center.clone(),
            axes: crate::linalg::sym_sqrt(&self.inv_shape),
        }
    }
}

/// Affine image of a unit ball, possibly flat: `{c + M y : |y| <= 1}` with
/// `M` of size `dim x k` (`k = 0` is a single point).
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidPiece {
    pub center: DVector<f64>,
    pub axes: DMatrix<f64>,
}

impl EllipsoidPiece {
    pub fn point(x: DVector<f64>) -> Self {
        let n = x.len();
        Self {
            center: x,
            axes: DMatrix::zeros(n, 0),
        }
    }

    pub fn new(center: DVector<f64>, axes: DMatrix<f64>) -> Result<Self> {
        if axes.nrows() != center.len() {
            return Err(GeomError::DimensionMismatch {
                expected: center.len(),
                got: axes.nrows(),
            });
        }
        if !center.iter().chain(axes.iter()).all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite("ellipsoid piece".into()));
        }
        Ok(Self { center, axes })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn support(&self, u: &DVector<f64>) -> f64 {
        self.center.dot(u) + self.radial(u)
    }

    fn radial(&self, u: &DVector<f64>) -> f64 {
        if self.axes.ncols() == 0 {
            0.0
        } else {
            self.axes
                .column_iter()
                .map(|c| c.dot(u).powi(2))
                .sum::<f64>()
                .sqrt()
        }
    }

    /// Touching point for normal `u`; `None` when `u` is normal to a flat
    /// piece (the whole piece is then the face).
    pub fn touching_point(&self, u: &DVector<f64>) -> Option<DVector<f64>> {
        if self.axes.ncols() == 0 {
            return Some(self.center.clone());
        }
        let w = self.axes.transpose() * u;
        let r = w.norm();
        let scale = self.axes.amax();
        if r <= 1e-12 * scale {
            return None;
        }
        Some(&self.center + &self.axes * (w / r))
    }

    /// Largest semi-axis length.
    pub fn radius(&self) -> f64 {
        if self.axes.ncols() == 0 {
            0.0
        } else {
            self.axes.clone().singular_values().max()
        }
    }

    pub fn mapped(&self, a: &DMatrix<f64>, t: Option<&DVector<f64>>) -> Self {
        let mut center = a * &self.center;
        if let Some(t) = t {
            center += t;
        }
        Self {
            center,
            axes: a * &self.axes,
        }
    }

    /// `center + axes * y` for each unit `y` in a deterministic sample of
    /// the parameter sphere, plus the axis endpoints.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let k = self.axes.ncols();
        if k == 0 {
            return vec![self.center.clone()];
        }
        let mut out = Vec::with_capacity(count + 2 * k);
        for j in 0..k {
            let col = self.axes.column(j);
            out.push(&self.center + col);
            out.push(&self.center - col);
        }
        if k >= 2 {
            for y in crate::sampling::sphere_directions(k, count, seed) {
                out.push(&self.center + &self.axes * y);
            }
        }
        out
    }
}
