use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::linalg::{canonical_sign, orthogonal_complement, orthonormalize};

/// Linear or affine flat `base_point + span(basis)`, basis orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
    base_point: DVector<f64>,
}

impl Subspace {
    /// Checks orthonormality of `basis` to 1e-12.
    pub fn new(basis: DMatrix<f64>, base_point: DVector<f64>) -> Result<Self> {
        let n = basis.nrows();
        let k = basis.ncols();
        if base_point.len() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: base_point.len(),
            });
        }
        if k == 0 || k > n {
            return Err(GeomError::InvalidSubspace(format!(
                "dimension {k} outside 1..={n}"
            )));
        }
        if !basis.iter().chain(base_point.iter()).all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite("subspace".into()));
        }
        let defect = (basis.transpose() * &basis - DMatrix::identity(k, k)).amax();
        if defect > 1e-12 {
            return Err(GeomError::InvalidSubspace(format!(
                "basis not orthonormal (defect {defect:.2e})"
            )));
        }
        Ok(Self { basis, base_point })
    }

    /// Orthonormalizes `spanning` (columns) first.
    pub fn from_spanning(spanning: &DMatrix<f64>, base_point: DVector<f64>) -> Result<Self> {
        Self::new(orthonormalize(spanning)?, base_point)
    }

    pub fn linear(basis: DMatrix<f64>) -> Result<Self> {
        let n = basis.nrows();
        Self::new(basis, DVector::zeros(n))
    }

    pub fn span(vectors: &[DVector<f64>]) -> Result<Self> {
        let m = DMatrix::from_columns(vectors);
        Self::from_spanning(&m, DVector::zeros(m.nrows()))
    }

    /// Coordinate subspace spanned by the given standard basis vectors.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let cols: Vec<DVector<f64>> = axes
            .iter()
            .map(|&i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        Self::span(&cols)
    }

    /// Linear hyperplane orthogonal to `normal`.
    pub fn hyperplane(normal: &DVector<f64>) -> Result<Self> {
        Self::affine_hyperplane(normal, DVector::zeros(normal.len()))
    }

    /// Hyperplane orthogonal to `normal` through `point`.
    pub fn affine_hyperplane(normal: &DVector<f64>, point: DVector<f64>) -> Result<Self> {
        let norm = normal.norm();
        if !(norm > 0.0) {
            return Err(GeomError::InvalidSubspace("zero normal".into()));
        }
        let b = DMatrix::from_columns(&[normal / norm]);
        Self::new(orthogonal_complement(&b), point)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.base_point
    }

    pub fn is_linear(&self) -> bool {
        self.base_point.iter().all(|x| *x == 0.0)
    }

    /// The linear subspace parallel to this flat.
    pub fn direction_space(&self) -> Subspace {
        Subspace {
            basis: self.basis.clone(),
            base_point: DVector::zeros(self.ambient_dim()),
        }
    }

    /// Orthogonal complement of the direction space (a linear subspace).
    /// Panics on full-dimensional flats.
    pub fn orthogonal(&self) -> Subspace {
        assert!(self.dim() < self.ambient_dim(), "full space has no complement");
        Subspace {
            basis: orthogonal_complement(&self.basis),
            base_point: DVector::zeros(self.ambient_dim()),
        }
    }

    /// Unit normal of a hyperplane (`dim = ambient_dim - 1`).
    pub fn normal(&self) -> Result<DVector<f64>> {
        if self.dim() + 1 != self.ambient_dim() {
            return Err(GeomError::InvalidSubspace("not a hyperplane".into()));
        }
        Ok(canonical_sign(&self.orthogonal().basis.column(0).into_owned()))
    }

    /// Coordinates of `x` in this flat's frame (after orthogonal projection).
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * (x - &self.base_point)
    }

    pub fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.base_point + &self.basis * y
    }

    /// Orthogonal projection of `x` onto the flat, in ambient coordinates.
    pub fn project_point(&self, x: &DVector<f64>) -> DVector<f64> {
        self.lift(&self.coords(x))
    }

    /// Projection of a direction onto the direction space.
    pub fn project_direction(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        (x - self.project_point(x)).norm()
    }
}

/// One-dimensional flat; direction is unit with the canonical sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Line(Subspace);

impl Line {
    pub fn new(base_point: DVector<f64>, direction: &DVector<f64>) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::InvalidSubspace("zero line direction".into()));
        }
        let d = canonical_sign(&(direction / n));
        Ok(Line(Subspace::new(DMatrix::from_columns(&[d]), base_point)?))
    }

    pub fn through_origin(direction: &DVector<f64>) -> Result<Self> {
        Self::new(DVector::zeros(direction.len()), direction)
    }

    pub fn direction(&self) -> DVector<f64> {
        self.0.basis().column(0).into_owned()
    }

    pub fn base_point(&self) -> &DVector<f64> {
        self.0.base_point()
    }

    pub fn as_subspace(&self) -> &Subspace {
        &self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    /// Base point moved to the foot of the perpendicular from the origin.
    pub fn normalized_base(&self) -> DVector<f64> {
        let d = self.direction();
        let p = self.base_point();
        p - &d * d.dot(p)
    }
}

impl From<Line> for Subspace {
    fn from(l: Line) -> Self {
        l.0
    }
}

/// `x -> matrix * x + translation`, matrix invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != translation.len() {
            return Err(GeomError::DimensionMismatch {
                expected: translation.len(),
                got: matrix.nrows(),
            });
        }
        if !matrix.iter().chain(translation.iter()).all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite("affine map".into()));
        }
        if matrix.determinant().abs() <= 1e-12 {
            return Err(GeomError::InvalidArgument("affine map is singular".into()));
        }
        Ok(Self {
            matrix,
            translation,
        })
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, DVector::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            translation: DVector::zeros(n),
        }
    }

    pub fn translation(t: DVector<f64>) -> Self {
        let n = t.len();
        Self {
            matrix: DMatrix::identity(n, n),
            translation: t,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x + &self.translation
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            matrix: &self.matrix * &inner.matrix,
            translation: &self.matrix * &inner.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .expect("affine map invariant: invertible");
        let t = -(&inv * &self.translation);
        AffineMap {
            matrix: inv,
            translation: t,
        }
    }

    /// Image of a line (direction through the linear part).
    pub fn map_line(&self, line: &Line) -> Result<Line> {
        Line::new(self.apply(line.base_point()), &(&self.matrix * line.direction()))
    }
}
