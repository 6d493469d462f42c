//! Small dense SPD linear algebra: Cholesky, solves, rank-one updates and
//! Gaussian sampling from a precision matrix.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RngStream;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("dimension must be positive")]
    Empty,
}

/// Dense real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "F: Real")]
pub struct Vector<F>(Vec<F>);

impl<F: Real> Vector<F> {
    /// Validated constructor: non-empty with finite entries.
    pub fn new(entries: Vec<F>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![F::zero(); d])
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d);
        v.0[i] = F::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }
}

impl<F> From<Vec<F>> for Vector<F> {
    fn from(v: Vec<F>) -> Self {
        Self(v)
    }
}

impl<F> Deref for Vector<F> {
    type Target = [F];
    fn deref(&self) -> &[F] {
        &self.0
    }
}

impl<F> DerefMut for Vector<F> {
    fn deref_mut(&mut self) -> &mut [F] {
        &mut self.0
    }
}

pub fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn max_abs<F: Real>(a: &[F]) -> F {
    a.iter().fold(F::zero(), |m, x| m.max(x.abs()))
}

fn symmetry_tolerance<F: Real>() -> F {
    F::of(1e-12).max(F::epsilon() * F::of(64.0))
}

/// Symmetric positive definite matrix, row-major full storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct SpdMatrix<F> {
    dim: usize,
    data: Vec<F>,
}

impl<F: Real> SpdMatrix<F> {
    pub fn identity(d: usize) -> Self {
        Self::diagonal(&vec![F::one(); d])
    }

    pub fn diagonal(diag: &[F]) -> Self {
        let d = diag.len();
        let mut data = vec![F::zero(); d * d];
        for (i, &x) in diag.iter().enumerate() {
            data[i * d + i] = x;
        }
        Self { dim: d, data }
    }

    /// Builds from rows, checking shape and symmetry. Positive definiteness is
    /// only checked when the matrix is factored.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self, LinalgError> {
        let d = rows.len();
        if d == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(LinalgError::DimensionMismatch { expected: d, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        let m = Self { dim: d, data };
        let tol = symmetry_tolerance::<F>() * m.max_abs().max(F::one());
        for i in 0..d {
            for j in 0..i {
                if (m.get(i, j) - m.get(j, i)).abs() > tol {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn diag(&self) -> Vec<F> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> F {
        max_abs(&self.data)
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.data
            .iter()
            .zip(&other.data)
            .fold(F::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// `self += x xᵀ`.
    pub fn add_outer(&mut self, x: &[F]) {
        let d = self.dim;
        for i in 0..d {
            let xi = x[i];
            let row = &mut self.data[i * d..(i + 1) * d];
            for (r, &xj) in row.iter_mut().zip(x) {
                *r += xi * xj;
            }
        }
    }

    /// Treating `self` as `A⁻¹`, replaces it with `(A + x xᵀ)⁻¹` by the
    /// Sherman–Morrison identity. O(d²).
    pub fn sherman_morrison(&mut self, x: &[F]) {
        let d = self.dim;
        let u = self.mul_vec(x);
        let denom = F::one() + dot(x, &u);
        for i in 0..d {
            let ui = u[i] / denom;
            let row = &mut self.data[i * d..(i + 1) * d];
            for (r, &uj) in row.iter_mut().zip(&u) {
                *r -= ui * uj;
            }
        }
        self.symmetrize();
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        let half = F::of(0.5);
        for i in 0..d {
            for j in 0..i {
                let m = (self.data[i * d + j] + self.data[j * d + i]) * half;
                self.data[i * d + j] = m;
                self.data[j * d + i] = m;
            }
        }
    }
}

/// Returns `a + x xᵀ` together with its inverse computed from `a_inv` by the
/// Sherman–Morrison identity.
pub fn rank_one_update<F: Real>(
    a: &SpdMatrix<F>,
    a_inv: &SpdMatrix<F>,
    x: &[F],
) -> Result<(SpdMatrix<F>, SpdMatrix<F>), LinalgError> {
    check_dim(a.dim(), x.len())?;
    check_dim(a.dim(), a_inv.dim())?;
    let mut updated = a.clone();
    updated.add_outer(x);
    let mut inv = a_inv.clone();
    inv.sherman_morrison(x);
    Ok((updated, inv))
}

fn check_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<F> {
    dim: usize,
    lower: Vec<F>,
}

pub fn cholesky<F: Real>(a: &SpdMatrix<F>) -> Result<Cholesky<F>, LinalgError> {
    let d = a.dim();
    let mut l = vec![F::zero(); d * d];
    for j in 0..d {
        let mut pivot = a.get(j, j);
        for k in 0..j {
            pivot -= l[j * d + k] * l[j * d + k];
        }
        if !(pivot > F::zero()) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: pivot.f64() });
        }
        let ljj = pivot.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    Ok(Cholesky { dim: d, lower: l })
}

impl<F: Real> Cholesky<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.lower[i * self.dim + j]
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> SpdMatrix<F> {
        let d = self.dim;
        let mut data = vec![F::zero(); d * d];
        for i in 0..d {
            for j in 0..=i {
                let s = (0..=j).fold(F::zero(), |s, k| s + self.get(i, k) * self.get(j, k));
                data[i * d + j] = s;
                data[j * d + i] = s;
            }
        }
        SpdMatrix { dim: d, data }
    }

    /// Solves `L y = b` in place.
    pub fn forward_substitute(&self, b: &mut [F]) {
        let d = self.dim;
        for i in 0..d {
            let row = &self.lower[i * d..i * d + i];
            let s = b[i] - dot(row, &b[..i]);
            b[i] = s / self.lower[i * d + i];
        }
    }

    /// Solves `Lᵀ y = b` in place.
    pub fn backward_substitute(&self, b: &mut [F]) {
        let d = self.dim;
        for i in (0..d).rev() {
            let mut s = b[i];
            for k in i + 1..d {
                s -= self.lower[k * d + i] * b[k];
            }
            b[i] = s / self.lower[i * d + i];
        }
    }

    pub fn solve(&self, b: &[F]) -> Result<Vector<F>, LinalgError> {
        check_dim(self.dim, b.len())?;
        let mut x = b.to_vec();
        self.forward_substitute(&mut x);
        self.backward_substitute(&mut x);
        Ok(Vector(x))
    }

    pub fn inverse(&self) -> SpdMatrix<F> {
        let d = self.dim;
        let mut data = vec![F::zero(); d * d];
        let mut col = vec![F::zero(); d];
        for j in 0..d {
            col.iter_mut().for_each(|c| *c = F::zero());
            col[j] = F::one();
            self.forward_substitute(&mut col);
            self.backward_substitute(&mut col);
            for i in 0..d {
                data[i * d + j] = col[i];
            }
        }
        let mut inv = SpdMatrix { dim: d, data };
        inv.symmetrize();
        inv
    }
}

pub fn solve_spd<F: Real>(a: &SpdMatrix<F>, b: &[F]) -> Result<Vector<F>, LinalgError> {
    check_dim(a.dim(), b.len())?;
    cholesky(a)?.solve(b)
}

/// Sampler for `N(mean, v² P⁻¹)` given the precision `P`. The factorization
/// is done once; each draw is one triangular solve.
///
/// With `P = L Lᵀ` and `z ~ N(0, I)`, `y = L⁻ᵀ z` has covariance `P⁻¹`.
#[derive(Debug, Clone)]
pub struct MvnSampler<F> {
    mean: Vec<F>,
    factor: Cholesky<F>,
    scale: F,
}

impl<F: Real> MvnSampler<F> {
    pub fn from_precision(mean: &[F], precision: &SpdMatrix<F>, scale: F) -> Result<Self, LinalgError> {
        check_dim(precision.dim(), mean.len())?;
        debug_assert!(scale > F::zero());
        Ok(Self { mean: mean.to_vec(), factor: cholesky(precision)?, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[F] {
        &self.mean
    }

    /// Writes one draw into `out` (length `dim`).
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [F]) {
        for z in out.iter_mut() {
            *z = F::of(rng.standard_normal());
        }
        self.factor.backward_substitute(out);
        for (o, &m) in out.iter_mut().zip(&self.mean) {
            *o = m + self.scale * *o;
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vector<F> {
        let mut out = vec![F::zero(); self.dim()];
        self.sample_into(rng, &mut out);
        Vector(out)
    }
}

/// One draw from `N(mean, v² precision⁻¹)`.
pub fn mvn_sample<F: Real>(
    mean: &[F],
    precision: &SpdMatrix<F>,
    v: F,
    rng: &mut RngStream,
) -> Result<Vector<F>, LinalgError> {
    Ok(MvnSampler::from_precision(mean, precision, v)?.sample(rng))
}
