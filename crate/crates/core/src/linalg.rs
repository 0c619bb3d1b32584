//! Dense complex operators and the eigensolver entry points used across the crate.
//!
//! Operators are stored as column-major `faer` matrices. Hamiltonians built by
//! this crate are real symmetric in the computational basis, so the Hermitian
//! eigensolvers detect a vanishing imaginary part and fall back to the real
//! symmetric path, which is several times faster.

use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Square complex matrix acting on a spin-chain Hilbert space or one of its sectors.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    mat: Mat<c64>,
}

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Mat<c64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self {
            mat: Mat::from_fn(dim, dim, f),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                c64::new(diag[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// Wraps a square matrix.
    ///
    /// Panics if `mat` is not square.
    pub fn from_mat(mat: Mat<c64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self { mat }
    }

    pub fn from_real(mat: MatRef<'_, f64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self::from_fn(mat.nrows(), |i, j| c64::new(mat[(i, j)], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: c64) {
        self.mat[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose().to_owned(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.conjugate().to_owned(),
        }
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.mat[(i, j)] * factor)
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// Frobenius inner product `tr(self† other)`.
    pub fn inner(&self, other: &Self) -> c64 {
        let n = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.mat[(i, j)].conj() * other.mat[(i, j)];
            }
        }
        acc
    }

    /// `tr(A²)` for Hermitian `A`, i.e. the squared Frobenius norm.
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max(self.mat[(i, j)].norm());
            }
        }
        worst
    }

    /// Largest elementwise deviation `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Max-norm deviation of `M†M` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.mat.adjoint() * &self.mat;
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest absolute imaginary part of any entry.
    pub fn max_imag(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max(self.mat[(i, j)].im.abs());
            }
        }
        worst
    }

    pub fn real_part(&self) -> Mat<f64> {
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)].re)
    }

    pub fn apply(&self, v: &[c64]) -> Result<Vec<c64>> {
        check_dim(self.dim(), v.len())?;
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.mat[(i, j)] * vj;
            }
        }
        Ok(out)
    }

    /// `⟨v|M|v⟩` for a normalized `v`.
    pub fn expectation(&self, v: &[c64]) -> Result<c64> {
        let mv = self.apply(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(self * rhs)
    }

    /// Eigendecomposition assuming `self` is Hermitian.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if self.max_imag() == 0.0 {
            let real = self.real_part();
            let evd = real
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let values = (0..self.dim()).map(|i| evd.S()[i]).collect();
            let u = evd.U();
            let vectors = Mat::from_fn(self.dim(), self.dim(), |i, j| c64::new(u[(i, j)], 0.0));
            Ok(HermitianEigen { values, vectors })
        } else {
            let evd = self
                .mat
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let values = (0..self.dim()).map(|i| evd.S()[i].re).collect();
            Ok(HermitianEigen {
                values,
                vectors: evd.U().to_owned(),
            })
        }
    }

    /// Ascending eigenvalues assuming `self` is Hermitian.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.max_imag() == 0.0 {
            symmetric_eigenvalues(self.real_part().as_ref())
        } else {
            self.mat
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))
        }
    }

    /// General complex eigenvalues (unsorted).
    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        self.mat
            .eigenvalues()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))
    }
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(mat: MatRef<'_, f64>) -> Result<Vec<f64>> {
    mat.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

pub(crate) fn norm_sqr(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl<'a> Mul<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl<'a> Add<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn hermitian_eigen_real_and_complex_paths_agree() {
        // sigma_y is Hermitian with a nonzero imaginary part
        let sy = DenseOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => zero(),
        });
        let vals = sy.hermitian_eigenvalues().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);

        let sx = DenseOperator::from_fn(2, |i, j| if i != j { c(1.0, 0.0) } else { zero() });
        let evd = sx.hermitian_eigen().unwrap();
        assert!((evd.values[0] + 1.0).abs() < 1e-14);
        let v0: Vec<c64> = (0..2).map(|i| evd.vectors[(i, 0)]).collect();
        let e = sx.expectation(&v0).unwrap();
        assert!((e.re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn residuals_detect_violations() {
        let id = DenseOperator::identity(4);
        assert_eq!(id.unitarity_residual(), 0.0);
        assert_eq!(id.hermiticity_residual(), 0.0);
        let mut m = DenseOperator::identity(3);
        m.set(0, 1, c(0.5, 0.0));
        assert!(m.hermiticity_residual() > 0.4);
        assert!(m.unitarity_residual() > 0.4);
    }

    #[test]
    fn apply_checks_dimension() {
        let id = DenseOperator::identity(2);
        assert!(matches!(
            id.apply(&[zero(); 3]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }
}
