//! Logarithms of dissipative matrices with the cut along the negative
//! imaginary axis, their anti-dissipative mirror images, spectral
//! projections and principal-value Cauchy transforms.
//!
//! For `Im T >= 0` the eigenvalues of `T` lie in the closed upper half-plane,
//! where the branch `arg z in (-pi/2, 3pi/2)` never meets its cut. That is
//! what makes `0 <= Im log T <= pi` hold.

mod cauchy;

pub use cauchy::{pv_cauchy, SampledDensity};

use core::f64::consts::{FRAC_PI_2, PI};


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    c, expm, hermitian_eigenvalues, identity, imag_part, inverse, norm, singular_values, CMatrix, GeneralEigen,
    HermitianOperator, C64,
};
use crate::quad;

const CUT_TOL: f64 = 1e-14;
const DISSIPATIVE_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e8;
const PANEL_TOL: f64 = 1e-9;
const PANEL_BUDGET: usize = 1 << 14;

/// Which route produced a [`BranchLogResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogMethod {
    Eigendecomposition,
    Quadrature,
}

/// Route selection for [`log_dissipative_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogStrategy {
    /// Eigendecomposition when the eigenvector basis is well conditioned,
    /// quadrature otherwise.
    Auto,
    ForceQuadrature,
}

#[derive(Debug, Clone)]
pub struct BranchLogResult {
    pub value: CMatrix,
    pub method: LogMethod,
    /// `||exp(value) - T|| / ||T||`.
    pub residual: f64,
}

impl BranchLogResult {
    /// Eigenvalues of `Im(value)`, ascending.
    pub fn imag_spectrum(&self) -> alloc::vec::Vec<f64> {
        hermitian_eigenvalues(&imag_part(&self.value))
    }
}

/// Scalar logarithm with `arg z in (-pi/2, 3pi/2)`.
pub fn log_imcut_scalar(z: C64) -> Result<C64> {
    if z.re.abs() <= CUT_TOL && z.im <= CUT_TOL {
        return Err(Error::Domain);
    }
    let mut arg = z.im.atan2(z.re);
    if arg <= -FRAC_PI_2 {
        arg += 2.0 * PI;
    }
    Ok(c(z.norm().ln(), arg))
}

/// Logarithm of a dissipative, invertible matrix.
pub fn log_dissipative(t: &CMatrix) -> Result<BranchLogResult> {
    log_dissipative_with(t, LogStrategy::Auto)
}

pub fn log_dissipative_with(t: &CMatrix, strategy: LogStrategy) -> Result<BranchLogResult> {
    if t.nrows() != t.ncols() || t.nrows() == 0 {
        return Err(Error::Dimension("logarithm needs a non-empty square matrix"));
    }
    let scale = norm(t);
    let im_min = hermitian_eigenvalues(&imag_part(t))[0];
    if im_min < -DISSIPATIVE_TOL * scale {
        return Err(Error::NotDissipative { min_eig: im_min });
    }
    let sigma_min = *singular_values(t).last().expect("non-empty");
    if sigma_min <= SINGULAR_TOL * scale {
        return Err(Error::Singular { sigma_min });
    }

    if strategy == LogStrategy::Auto {
        if let Some(value) = log_by_eigendecomposition(t)? {
            let residual = norm(&(expm(&value) - t)) / scale;
            if residual <= 1e-8 {
                return Ok(BranchLogResult { value, method: LogMethod::Eigendecomposition, residual });
            }
        }
    }
    let value = log_by_quadrature(t)?;
    let residual = norm(&(expm(&value) - t)) / scale;
    Ok(BranchLogResult { value, method: LogMethod::Quadrature, residual })
}

fn log_by_eigendecomposition(t: &CMatrix) -> Result<Option<CMatrix>> {
    let eig = GeneralEigen::new(t);
    if eig.condition() >= MAX_CONDITION {
        return Ok(None);
    }
    let Some(vinv) = inverse(&eig.vectors) else {
        return Ok(None);
    };
    let n = t.nrows();
    let mut scaled = eig.vectors.clone();
    for k in 0..n {
        // Dissipative spectra sit in the closed upper half-plane; roundoff can
        // push a real eigenvalue a hair below the axis, which the branch
        // tolerates except right at the origin (excluded by invertibility).
        let lk = log_imcut_scalar(eig.values[k])?;
        for i in 0..n {
            scaled[(i, k)] *= lk;
        }
    }
    Ok(Some(scaled * vinv))
}

/// `log T = -i * int_0^inf ((T + i l)^{-1} - (1 + i l)^{-1}) dl` with
/// `l = tan(theta)`.
fn log_by_quadrature(t: &CMatrix) -> Result<CMatrix> {
    let n = t.nrows();
    let id = identity(n);
    let scale = norm(t).max(1.0);
    let integrand = |theta: f64| -> CMatrix {
        let (s, co) = theta.sin_cos();
        if co <= 1e-300 {
            // limit theta -> pi/2 of the integrand is T - I
            return (t - &id) * c(0.0, -1.0);
        }
        let lam = s / co;
        let jac = 1.0 / (co * co);
        let shifted = t + &id * c(0.0, lam);
        let r = inverse(&shifted).unwrap_or_else(|| CMatrix::from_element(n, n, c(f64::NAN, f64::NAN)));
        let scalar = c(1.0, lam).inv();
        (r - &id * scalar) * (c(0.0, -1.0) * jac)
    };
    let v = quad::adaptive(integrand, 0.0, FRAC_PI_2, PANEL_TOL * scale, PANEL_BUDGET)?;
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::QuadratureFailure { panels: PANEL_BUDGET });
    }
    Ok(v)
}

/// Logarithm of an anti-dissipative matrix, `(log S*)*`.
pub fn log_antidissipative(s: &CMatrix) -> Result<BranchLogResult> {
    let adj = s.adjoint();
    let r = log_dissipative(&adj).map_err(|e| match e {
        Error::NotDissipative { min_eig } => Error::NotAntiDissipative { max_eig: -min_eig },
        other => other,
    })?;
    Ok(BranchLogResult { value: r.value.adjoint(), method: r.method, residual: r.residual })
}

/// Orthogonal projection onto the negative spectral subspace of `a`.
pub fn negative_spectral_projection(a: &HermitianOperator) -> Result<CMatrix> {
    let band = 1e-10 * a.norm();
    if let Some(&e) = a.eigenvalues().iter().find(|e| e.abs() <= band) {
        return Err(Error::NearSingular { eigenvalue: e });
    }
    Ok(a.spectral_projection(|e| e < 0.0))
}
