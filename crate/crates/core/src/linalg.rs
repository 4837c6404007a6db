//! Small dense vectors and matrices with an indefinite (Lorentzian) inner product.
//!
//! Ambient dimensions stay below ten, so everything is stored densely on top of
//! `nalgebra`'s dynamic types.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for [`numeric_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Default relative near-null tolerance for [`orthonormalize_signature`].
pub const DEFAULT_ORTHO_TOL: f64 = 1e-10;

/// A vector in ambient coordinates: `(t, x_1, .., x_{n-1})` for the warped
/// backend, or the `n + 1` flat coordinates of the embedded product backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmbientVector(Vec<f64>);

impl AmbientVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn from_slice(components: &[f64]) -> Self {
        Self(components.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `index`-th coordinate basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// Plain Euclidean length of the coordinate array.
    pub fn coord_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }

    /// Linear combination `sum_i weights[i] * vectors[i]`.
    pub fn combination(weights: &[f64], vectors: &[&AmbientVector]) -> Self {
        let dim = vectors.first().map_or(0, |v| v.dim());
        let mut out = Self::zeros(dim);
        for (w, v) in weights.iter().zip(vectors) {
            for (o, x) in out.0.iter_mut().zip(&v.0) {
                *o += w * x;
            }
        }
        out
    }
}

impl Index<usize> for AmbientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for AmbientVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: &AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: AmbientVector) -> AmbientVector {
        &self + &rhs
    }
}

impl Sub for &AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: &AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Sub for AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: AmbientVector) -> AmbientVector {
        &self - &rhs
    }
}

impl Mul<f64> for &AmbientVector {
    type Output = AmbientVector;
    fn mul(self, s: f64) -> AmbientVector {
        self.scale(s)
    }
}

impl Mul<f64> for AmbientVector {
    type Output = AmbientVector;
    fn mul(self, s: f64) -> AmbientVector {
        self.scale(s)
    }
}

impl Mul<&AmbientVector> for f64 {
    type Output = AmbientVector;
    fn mul(self, v: &AmbientVector) -> AmbientVector {
        v.scale(self)
    }
}

impl Neg for &AmbientVector {
    type Output = AmbientVector;
    fn neg(self) -> AmbientVector {
        self.scale(-1.0)
    }
}

impl Neg for AmbientVector {
    type Output = AmbientVector;
    fn neg(self) -> AmbientVector {
        self.scale(-1.0)
    }
}

impl AddAssign<&AmbientVector> for AmbientVector {
    fn add_assign(&mut self, rhs: &AmbientVector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&AmbientVector> for AmbientVector {
    fn sub_assign(&mut self, rhs: &AmbientVector) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

/// A symmetric metric matrix at a point, together with its positive-definite
/// companion `|G|` used for norms of residual vectors and for rank estimation.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    matrix: DMatrix<f64>,
    companion: DMatrix<f64>,
    diagonal: bool,
}

impl Metric {
    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let matrix = DMatrix::from_diagonal(&DVector::from_column_slice(entries));
        let abs: Vec<f64> = entries.iter().map(|x| x.abs()).collect();
        let companion = DMatrix::from_diagonal(&DVector::from_column_slice(&abs));
        debug_assert_eq!(matrix.nrows(), n);
        Self {
            matrix,
            companion,
            diagonal: true,
        }
    }

    /// Minkowski metric `diag(-1, 1, .., 1)` of the given dimension.
    pub fn minkowski(dim: usize) -> Self {
        let mut entries = vec![1.0; dim];
        entries[0] = -1.0;
        Self::diagonal(&entries)
    }

    /// General symmetric matrix. `|G|` is formed from its eigen-decomposition.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Usage("metric matrix must be square".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * matrix.amax().max(1.0) {
            return Err(Error::Usage(format!(
                "metric matrix is not symmetric (asymmetry {asym:.3e})"
            )));
        }
        let eig = matrix.clone().symmetric_eigen();
        let abs_vals = eig.eigenvalues.map(f64::abs);
        let companion =
            &eig.eigenvectors * DMatrix::from_diagonal(&abs_vals) * eig.eigenvectors.transpose();
        Ok(Self {
            matrix,
            companion,
            diagonal: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// `u^T G v` with a dimension check.
    pub fn inner(&self, u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
        u.check_dim(self.dim())?;
        v.check_dim(self.dim())?;
        Ok(self.dot(u, v))
    }

    /// `u^T G v` without the dimension check.
    pub fn dot(&self, u: &AmbientVector, v: &AmbientVector) -> f64 {
        quad(&self.matrix, self.diagonal, u.as_slice(), v.as_slice())
    }

    pub fn self_inner(&self, u: &AmbientVector) -> f64 {
        self.dot(u, u)
    }

    /// Inner product with respect to the positive companion `|G|`.
    pub fn companion_dot(&self, u: &AmbientVector, v: &AmbientVector) -> f64 {
        quad(&self.companion, self.diagonal, u.as_slice(), v.as_slice())
    }

    /// Positive-definite length `sqrt(u^T |G| u)`; for space-like tangent
    /// vectors this coincides with the induced length.
    pub fn norm(&self, u: &AmbientVector) -> f64 {
        self.companion_dot(u, u).max(0.0).sqrt()
    }
}

fn quad(m: &DMatrix<f64>, diagonal: bool, u: &[f64], v: &[f64]) -> f64 {
    if diagonal {
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(i, (a, b))| a * m[(i, i)] * b)
            .sum()
    } else {
        let n = u.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += u[i] * m[(i, j)] * v[j];
            }
        }
        s
    }
}

/// A real 2x2 matrix, row-major. Used for induced metrics and shape operators
/// expressed in the `(e_1, e_2)` basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallMatrix2(pub [[f64; 2]; 2]);

impl SmallMatrix2 {
    pub const ZERO: Self = Self([[0.0; 2]; 2]);
    pub const IDENTITY: Self = Self([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self([[m11, m12], [m21, m22]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self([[a, 0.0], [0.0, b]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0[0][1] - self.0[1][0]).abs()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() < tol
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let [[a, b], [c, e]] = self.0;
        Some(Self([[e / d, -b / d], [-c / d, a / d]]))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        Self(out)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.matmul(other);
        let ba = other.matmul(self);
        Self([
            [ab.0[0][0] - ba.0[0][0], ab.0[0][1] - ba.0[0][1]],
            [ab.0[1][0] - ba.0[1][0], ab.0[1][1] - ba.0[1][1]],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Positive definite in the sense of both leading minors.
    pub fn is_positive_definite(&self) -> bool {
        self.0[0][0] > 0.0 && self.det() > 0.0
    }
}

/// Output of [`orthonormalize_signature`]: `vectors[i]` has self-inner product
/// `signs[i]` (`-1` time-like, `+1` space-like).
#[derive(Clone, Debug)]
pub struct SignedFrame {
    pub vectors: Vec<AmbientVector>,
    pub signs: Vec<f64>,
}

/// Gram-Schmidt with respect to an indefinite metric.
///
/// Output `i` lies in the span of inputs `0..=i` and has a positive component
/// along input `i`. A time-like candidate should come first; a near-null
/// intermediate vector (`|<w,w>| < tol * |w|^2`, measured with `|G|`) is an error.
pub fn orthonormalize_signature(
    vectors: &[AmbientVector],
    metric: &Metric,
    tol: f64,
) -> Result<SignedFrame> {
    let mut out: Vec<AmbientVector> = Vec::with_capacity(vectors.len());
    let mut signs = Vec::with_capacity(vectors.len());
    for v in vectors {
        v.check_dim(metric.dim())?;
        let w = reject_from(v, &out, &signs, metric);
        let q = metric.self_inner(&w);
        let scale = metric.companion_dot(&w, &w);
        if !(q.abs() > tol * scale) || scale == 0.0 {
            return Err(Error::DegenerateFrame { self_inner: q });
        }
        signs.push(q.signum());
        out.push(w.scale(1.0 / q.abs().sqrt()));
    }
    Ok(SignedFrame {
        vectors: out,
        signs,
    })
}

/// `v` minus its components along an orthonormal set with the given signs.
pub fn reject_from(
    v: &AmbientVector,
    frame: &[AmbientVector],
    signs: &[f64],
    metric: &Metric,
) -> AmbientVector {
    let mut w = v.clone();
    for (f, s) in frame.iter().zip(signs) {
        // Two passes of classical Gram-Schmidt are as stable as modified GS here.
        let c = s * metric.dot(&w, f);
        w = w.axpy(-c, f);
    }
    for (f, s) in frame.iter().zip(signs) {
        let c = s * metric.dot(&w, f);
        w = w.axpy(-c, f);
    }
    w
}

/// Numerical rank of a list of vectors.
///
/// Computes the Gram matrix with respect to the positive companion `|G|` (so
/// null vectors are not mistaken for zero) and counts singular values above
/// `tol` times the largest one.
pub fn numeric_rank(vectors: &[AmbientVector], metric: &Metric, tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let k = vectors.len();
    let gram = DMatrix::from_fn(k, k, |i, j| metric.companion_dot(&vectors[i], &vectors[j]));
    let sv = gram.singular_values();
    let largest = sv.max();
    if !(largest > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> AmbientVector {
        AmbientVector::from_slice(c)
    }

    #[test]
    fn inner_examples() {
        let g = Metric::diagonal(&[-1.0, 4.0, 4.0, 4.0]);
        let dt = AmbientVector::basis(4, 0);
        let dx1 = AmbientVector::basis(4, 1);
        assert_eq!(g.inner(&dt, &dt).unwrap(), -1.0);
        assert_eq!(g.inner(&dx1, &dx1).unwrap(), 4.0);
        assert_eq!(g.inner(&dt, &dx1).unwrap(), 0.0);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let g = Metric::minkowski(4);
        let err = g
            .inner(&AmbientVector::zeros(3), &AmbientVector::zeros(4))
            .unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn orthonormal_input_is_unchanged() {
        let g = Metric::minkowski(4);
        let f = orthonormalize_signature(
            &[v(&[1., 0., 0., 0.]), v(&[0., 1., 0., 0.])],
            &g,
            DEFAULT_ORTHO_TOL,
        )
        .unwrap();
        assert_eq!(f.vectors[0], v(&[1., 0., 0., 0.]));
        assert_eq!(f.vectors[1], v(&[0., 1., 0., 0.]));
        assert_eq!(f.signs, vec![-1.0, 1.0]);
    }

    #[test]
    fn null_vector_is_degenerate() {
        let g = Metric::minkowski(4);
        let err = orthonormalize_signature(
            &[v(&[1., 1., 0., 0.]), v(&[0., 1., 0., 0.])],
            &g,
            DEFAULT_ORTHO_TOL,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { .. }));
    }

    #[test]
    fn timelike_scaling() {
        let g = Metric::minkowski(4);
        let f = orthonormalize_signature(&[v(&[2., 0., 0., 0.])], &g, DEFAULT_ORTHO_TOL).unwrap();
        assert_eq!(f.vectors[0], v(&[1., 0., 0., 0.]));
        assert_eq!(f.signs, vec![-1.0]);
    }

    #[test]
    fn rank_examples() {
        let g = Metric::minkowski(4);
        let a = v(&[0.3, 1.0, -2.0, 0.5]);
        assert_eq!(
            numeric_rank(&[a.clone(), a.scale(2.0)], &g, DEFAULT_RANK_TOL),
            1
        );
        assert_eq!(
            numeric_rank(
                &[v(&[0., 1., 0., 0.]), v(&[0., 0., 1., 0.])],
                &g,
                DEFAULT_RANK_TOL
            ),
            2
        );
        assert_eq!(numeric_rank(&[], &g, DEFAULT_RANK_TOL), 0);
        // a null vector still counts
        assert_eq!(
            numeric_rank(&[v(&[1., 1., 0., 0.])], &g, DEFAULT_RANK_TOL),
            1
        );
        assert_eq!(
            numeric_rank(&[AmbientVector::zeros(4)], &g, DEFAULT_RANK_TOL),
            0
        );
    }

    #[test]
    fn general_metric_companion() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g = Metric::from_matrix(m).unwrap();
        let e = v(&[1.0, 0.0]);
        assert_eq!(g.self_inner(&e), 0.0);
        assert!((g.norm(&e) - 1.0).abs() < 1e-14);
        assert!(Metric::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn small_matrix_algebra() {
        let a = SmallMatrix2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(a.trace(), 5.0);
        assert_eq!(a.det(), -2.0);
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv);
        assert!((id.get(0, 0) - 1.0).abs() < 1e-14 && id.get(0, 1).abs() < 1e-14);
        let d = SmallMatrix2::diag(1.0, 2.0);
        assert_eq!(
            d.commutator(&SmallMatrix2::diag(3.0, -1.0)),
            SmallMatrix2::ZERO
        );
        assert!(a.commutator(&d).max_abs() > 0.0);
    }
}
