//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Everything here works on small dynamically sized matrices; the heavy
//! lifting (Schur, SVD, Hermitian eigensolver, LU) is delegated to nalgebra.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().copied().sum()
}

/// `(A + A*) / 2`.
pub fn real_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `(A - A*) / (2i)`, always Hermitian.
pub fn imag_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * c(0.0, -0.5)
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().try_inverse()
}

pub fn det(a: &CMatrix) -> C64 {
    if a.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    a.clone().lu().determinant()
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn trace_norm(a: &CMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// symmetrized first.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = real_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let nrm = norm(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while nrm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.scale(scale);
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..40 {
        term = &term * &x / c(k as f64, 0.0);
        sum += &term;
        if norm(&term) <= 1e-18 * norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// A self-adjoint matrix together with its (ascending) eigendecomposition.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Dimension("Hermitian operator must be square and non-empty"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries"));
        }
        let scale = norm(&matrix).max(f64::MIN_POSITIVE);
        let skew = norm(&(&matrix - matrix.adjoint()));
        if skew > 1e-12 * scale {
            return Err(Error::InvalidArgument("matrix is not Hermitian"));
        }
        let matrix = real_part(&matrix);
        let eig = matrix.clone().symmetric_eigen();
        let n = matrix.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
        let op = Self { matrix, eigenvalues, eigenvectors };
        let recon = op.apply_function(|x| c(x, 0.0));
        if norm(&(&recon - &op.matrix)) > 1e-10 * scale {
            return Err(Error::InvalidArgument("eigendecomposition failed to reconstruct the matrix"));
        }
        Ok(op)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            matrix: CMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i], 0.0) } else { C64::new(0.0, 0.0) }),
            eigenvalues: {
                let mut d = diag.to_vec();
                d.sort_by(f64::total_cmp);
                d
            },
            eigenvectors: {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
                CMatrix::from_fn(n, n, |r, k| if r == order[k] { c(1.0, 0.0) } else { c(0.0, 0.0) })
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn norm(&self) -> f64 {
        norm(&self.matrix)
    }

    /// Number of eigenvalues `<= lambda`.
    pub fn count_le(&self, lambda: f64) -> usize {
        self.eigenvalues.partition_point(|&e| e <= lambda)
    }

    pub fn distance_to_spectrum(&self, z: C64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|&e| (z - e).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `f(A) = U diag(f(lambda)) U*`.
    pub fn apply_function<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let fv: Vec<C64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == C64::new(0.0, 0.0) {
                continue;
            }
            let col = u.column(k);
            for j in 0..n {
                let w = fv[k] * col[j].conj();
                for i in 0..n {
                    out[(i, j)] += col[i] * w;
                }
            }
        }
        out
    }

    /// Orthogonal projection onto the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projection<F: Fn(f64) -> bool>(&self, keep: F) -> CMatrix {
        self.apply_function(|e| if keep(e) { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn resolvent(&self, z: C64) -> CMatrix {
        self.apply_function(|e| (c(e, 0.0) - z).inv())
    }

    /// Precomputes `U* K` so that `K* (A - z)^{-1} K` is cheap for many `z`.
    pub fn sandwich(&self, k: &CMatrix) -> ResolventSandwich {
        ResolventSandwich { coeff: self.eigenvectors.adjoint() * k, eigenvalues: self.eigenvalues.clone() }
    }
}

/// `z -> K* (A - z)^{-1} K` for a fixed Hermitian `A` and rectangular `K`.
#[derive(Debug, Clone)]
pub struct ResolventSandwich {
    coeff: CMatrix,
    eigenvalues: Vec<f64>,
}

impl ResolventSandwich {
    pub fn at(&self, z: C64) -> CMatrix {
        self.weighted(|e| (c(e, 0.0) - z).inv())
    }

    /// `K* (A - z)^{-2} K`, the z-derivative of [`Self::at`].
    pub fn derivative_at(&self, z: C64) -> CMatrix {
        self.weighted(|e| {
            let r = (c(e, 0.0) - z).inv();
            r * r
        })
    }

    fn weighted<F: Fn(f64) -> C64>(&self, w: F) -> CMatrix {
        let m = self.coeff.ncols();
        let mut out = CMatrix::zeros(m, m);
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let wk = w(e);
            let row = self.coeff.row(k);
            for j in 0..m {
                let t = wk * row[j];
                for i in 0..m {
                    out[(i, j)] += row[i].conj() * t;
                }
            }
        }
        out
    }
}

/// Eigendecomposition `A = V diag(values) V^{-1}` of a general complex matrix,
/// obtained from the complex Schur form by triangular back substitution.
#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
}

impl GeneralEigen {
    pub fn new(a: &CMatrix) -> Self {
        let n = a.nrows();
        let (q, t) = a.clone().schur().unpack();
        let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
        let scale = norm(a).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        let mut x = CMatrix::zeros(n, n);
        for k in 0..n {
            x[(k, k)] = c(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = C64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    acc += t[(i, j)] * x[(j, k)];
                }
                let mut d = t[(i, i)] - t[(k, k)];
                if d.norm() < tiny {
                    d = c(tiny, 0.0);
                }
                x[(i, k)] = -acc / d;
            }
            let nrm = x.column(k).norm();
            x.column_mut(k).unscale_mut(nrm);
        }
        Self { values, vectors: q * x }
    }

    /// Two-norm condition number of the eigenvector matrix.
    pub fn condition(&self) -> f64 {
        let s = singular_values(&self.vectors);
        match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

/// Hermitian square root; eigenvalues in `[-clip, 0)` are set to zero.
pub fn hermitian_sqrt(a: &CMatrix, clip: f64) -> Result<CMatrix> {
    let op = HermitianOperator::new(a.clone())?;
    if let Some(&lo) = op.eigenvalues().first() {
        if lo < -clip {
            return Err(Error::FactorizationFailure { eigenvalue: lo });
        }
    }
    Ok(op.apply_function(|e| c(e.max(0.0).sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![c(1.0, 0.0), c(0.0, core::f64::consts::PI)]));
        let e = expm(&a);
        assert!((e[(0, 0)] - c(core::f64::consts::E, 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn general_eigen_reconstructs_non_normal_matrix() {
        let a = CMatrix::from_row_slice(3, 3, &[
            c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0),
            c(0.0, 0.0), c(-1.0, 0.2), c(3.0, 0.0),
            c(0.5, 0.0), c(0.0, 0.0), c(2.0, 1.0),
        ]);
        let eig = GeneralEigen::new(&a);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()));
        let recon = &eig.vectors * d * inverse(&eig.vectors).unwrap();
        assert!(norm(&(recon - &a)) < 1e-12);
    }

    #[test]
    fn hermitian_operator_sorts_and_counts() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let op = HermitianOperator::new(a).unwrap();
        assert!((op.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((op.eigenvalues()[1] - 3.0).abs() < 1e-14);
        assert_eq!(op.count_le(1.5), 1);
        assert_eq!(op.count_le(3.5), 2);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(HermitianOperator::new(a).is_err());
    }
}
