//! A model with purely absolutely continuous spectrum, specified through the
//! matrix density `A(lambda) = d(K* E_{H0}(lambda) K)/d lambda` on `[a, b]`.
//!
//! Everything here is driven by `T(z) = int A(mu) (mu - z)^{-1} d mu` and
//! `Phi(z) = I + s T(z)`. Boundary values on the support follow from
//! Plemelj: `T(lambda +- i0) = P.V. int A(mu)/(mu - lambda) d mu +- i pi A(lambda)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::branchlog::{log_antidissipative, log_dissipative, pv_cauchy, SampledDensity};
use crate::error::{Error, Result};
use crate::linalg::{c, det, expm, hermitian_sqrt, identity, imag_part, inverse, norm, singular_values, trace, CMatrix, HermitianOperator, C64};
use crate::quad;

pub const MIN_NODES: usize = 256;
const PSD_TOL: f64 = 1e-12;
const ENDPOINT_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-8;
const EXTERIOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct ContinuumModel {
    density: SampledDensity,
    /// `T` on the grid nodes (real at the two endpoints).
    t_nodes: Vec<CMatrix>,
}

impl ContinuumModel {
    pub fn new(density: SampledDensity) -> Result<Self> {
        let n = density.len();
        if n < MIN_NODES {
            return Err(Error::GridTooCoarse { nodes: n, required: MIN_NODES });
        }
        let scale = density.values().iter().map(norm).fold(0.0, f64::max).max(1.0);
        for v in density.values() {
            let op = HermitianOperator::new(v.clone())?;
            if op.eigenvalues()[0] < -PSD_TOL * scale {
                return Err(Error::InvalidArgument("density must be positive semi-definite"));
            }
        }
        let vals = density.values();
        if norm(&vals[0]) > ENDPOINT_TOL * scale || norm(&vals[n - 1]) > ENDPOINT_TOL * scale {
            return Err(Error::InvalidArgument("density must vanish at both endpoints"));
        }
        let t_nodes = (0..n)
            .map(|j| {
                let pv = density.cauchy_on_support(density.node(j))?;
                Ok(pv + &vals[j] * c(0.0, PI))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { density, t_nodes })
    }

    pub fn from_fn<F: FnMut(f64) -> CMatrix>(a: f64, b: f64, nodes: usize, f: F) -> Result<Self> {
        Self::new(SampledDensity::from_fn(a, b, nodes, f)?)
    }

    pub fn density(&self) -> &SampledDensity {
        &self.density
    }

    pub fn rank(&self) -> usize {
        self.density.dim()
    }

    pub fn support(&self) -> (f64, f64) {
        self.density.support()
    }

    /// `T(lambda +- i0)`; `lambda` must keep two cells from either endpoint.
    pub fn t_boundary(&self, lambda: f64, side: Side) -> Result<CMatrix> {
        let pv = pv_cauchy(&self.density, lambda)?;
        let a = self.density.value_at(lambda);
        Ok(match side {
            Side::Plus => pv + a * c(0.0, PI),
            Side::Minus => pv - a * c(0.0, PI),
        })
    }

    /// `T(x)` for real `x` off the support, where it is Hermitian.
    pub fn t_outside(&self, x: f64) -> Result<CMatrix> {
        let (a, b) = self.support();
        if x > a && x < b {
            return Err(Error::InvalidArgument("point lies inside the support"));
        }
        Ok(self.density.cauchy_outside(x))
    }

    /// `T(z) = int A(mu) (mu - z)^{-1} d mu` on the grid, for `z` off the real axis.
    pub fn t_at(&self, z: C64) -> CMatrix {
        let m = self.rank();
        let mut out = CMatrix::zeros(m, m);
        for (j, (v, w)) in self.density.values().iter().zip(self.density.weights()).enumerate() {
            out += v * (c(w, 0.0) / (c(self.density.node(j), 0.0) - z));
        }
        out
    }

    pub fn phi_boundary(&self, lambda: f64, s: f64, side: Side) -> Result<CMatrix> {
        Ok(identity(self.rank()) + self.t_boundary(lambda, side)? * c(s, 0.0))
    }

    /// `Xi_+(lambda, s)` for `s > 0`, `Xi_-(lambda, s)` for `s < 0`.
    pub fn xsso_pm(&self, lambda: f64, s: f64) -> Result<CMatrix> {
        if s == 0.0 {
            return Err(Error::InvalidArgument("coupling must be non-zero"));
        }
        let phi = self.phi_boundary(lambda, s, Side::Plus)?;
        let signed = signed_xi(&phi, s)?;
        Ok(if s > 0.0 { signed } else { -signed })
    }

    /// `Xi_s(lambda) = Im log Phi(lambda + i0) / pi`, i.e. `Xi_+` for `s > 0`
    /// and `-Xi_-` for `s < 0`, at grid node `j` (endpoints included).
    fn signed_xi_at_node(&self, j: usize, s: f64) -> Result<CMatrix> {
        let phi = identity(self.rank()) + &self.t_nodes[j] * c(s, 0.0);
        signed_xi(&phi, s)
    }

    pub fn scattering_matrix(&self, lambda: f64, s: f64) -> Result<ScatteringSample> {
        let m = self.rank();
        if s == 0.0 {
            let id = identity(m);
            return Ok(ScatteringSample {
                lambda,
                s: id.clone(),
                s_eff: id,
                xi: 0.0,
                xi_op: CMatrix::zeros(m, m),
                unitarity: 0.0,
            });
        }
        let t = self.t_boundary(lambda, Side::Plus)?;
        let phi_plus = identity(m) + &t * c(s, 0.0);
        let sigma_min = *singular_values(&phi_plus).last().expect("non-empty");
        if sigma_min <= SINGULAR_TOL {
            return Err(Error::Singular { sigma_min });
        }
        let inv = inverse(&phi_plus).ok_or(Error::Singular { sigma_min })?;
        let phi_minus = phi_plus.adjoint();
        let s_mat = &inv * &phi_minus;
        // unitary representative acting on ran A(lambda):
        // I - 2 pi i s A^{1/2} Phi(lambda + i0)^{-1} A^{1/2}
        let root = hermitian_sqrt(&self.density.value_at(lambda), 1e-10)?;
        let s_eff = identity(m) - &root * &inv * &root * c(0.0, 2.0 * PI * s);
        let unitarity = norm(&(s_eff.adjoint() * &s_eff - identity(m)));
        let xi = tracked_arg(|sv| det(&(identity(m) + &t * c(sv, 0.0))), s)? / PI;
        let xi_op = self.xsso_pm(lambda, s)?;
        Ok(ScatteringSample { lambda, s: s_mat, s_eff, xi, xi_op, unitarity })
    }

    /// `|det S(lambda) - exp(-2 pi i xi(lambda))|` with `xi = tr Xi_+` for
    /// `s > 0` and `xi = -tr Xi_-` for `s < 0`.
    pub fn birman_krein_residual(&self, lambda: f64, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let sample = self.scattering_matrix(lambda, s)?;
        let xi = s.signum() * trace(&sample.xi_op).re;
        Ok((det(&sample.s) - (c(0.0, -2.0 * PI * xi)).exp()).norm())
    }

    /// Distance between `S(lambda)` and the product
    /// `exp(-P Xi - i pi Xi) exp(P Xi - i pi Xi)`, where `Xi = Xi_s` is
    /// sampled on the model grid and `P Xi` is its Hilbert transform
    /// (including the part of `Xi` living off the support).
    pub fn lemma47_residual(&self, lambda: f64, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let (a, b) = self.support();
        let n = self.density.len();
        let samples = (0..n).map(|j| self.signed_xi_at_node(j, s)).collect::<Result<Vec<_>>>()?;
        let xi_density = SampledDensity::new(a, b, samples)?;
        let xi = xi_density.value_at(lambda);
        let pxi = pv_cauchy(&xi_density, lambda)? + self.exterior_integral(s, |mu| 1.0 / (mu - lambda))?;
        let product = expm(&(-&pxi - &xi * c(0.0, PI))) * expm(&(&pxi - &xi * c(0.0, PI)));
        let sample = self.scattering_matrix(lambda, s)?;
        Ok(norm(&(sample.s - product)))
    }

    /// `int w(mu) Xi_s(mu) d mu` over the real line minus the support. There
    /// `Phi(mu)` is Hermitian and `Xi_s = sign(s)` times its negative spectral
    /// projection, nonzero only on the side where `s T(mu) < 0` and within
    /// `|s| ||int A||` of the support.
    fn exterior_integral<W: Fn(f64) -> f64>(&self, s: f64, weight: W) -> Result<CMatrix> {
        let m = self.rank();
        let (a, b) = self.support();
        let reach = s.abs() * norm(&self.density.integral()) * (1.0 + 1e-9) + 1e-12;
        // Phi(mu) increases in the direction away from the support on the
        // active side, so the number of negative eigenvalues steps down.
        let (edge, dir) = if s > 0.0 { (b, 1.0) } else { (a, -1.0) };
        let phi_at = |mu: f64| -> Result<HermitianOperator> {
            let t = self.density.cauchy_outside(mu);
            let p = identity(m) + t * c(s, 0.0);
            HermitianOperator::new((&p + p.adjoint()) * c(0.5, 0.0))
        };
        let negatives = |mu: f64| -> Result<usize> { Ok(phi_at(mu)?.count_le(0.0)) };
        let top = negatives(edge + dir * 1e-14 * (1.0 + edge.abs()))?;
        let mut out = CMatrix::zeros(m, m);
        if top == 0 {
            return Ok(out);
        }
        // distance from the edge at which the k-th negative eigenvalue turns positive
        let mut crossings = Vec::with_capacity(top);
        for k in (1..=top).rev() {
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if negatives(edge + dir * mid)? >= k {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * (1.0 + edge.abs() + hi) {
                    break;
                }
            }
            crossings.push(0.5 * (lo + hi));
        }
        let mut start = 0.0;
        for (idx, &stop) in crossings.iter().enumerate() {
            let k = top - idx;
            if stop > start {
                let integrand = |d: f64| -> CMatrix {
                    let mu = edge + dir * d;
                    match phi_at(mu) {
                        Ok(op) => lowest_projection(&op, k) * c(weight(mu), 0.0),
                        Err(_) => CMatrix::from_element(m, m, c(f64::NAN, f64::NAN)),
                    }
                };
                let v = quad::adaptive(integrand, start, stop, EXTERIOR_TOL, 1 << 14)?;
                if v.iter().any(|z| !z.re.is_finite()) {
                    return Err(Error::QuadratureFailure { panels: 1 << 14 });
                }
                out += v;
            }
            start = stop;
        }
        // the orientation flip on the left side cancels, leaving sign(s) = dir
        Ok(out * c(dir, 0.0))
    }

    /// `int Xi_+(lambda, s) d lambda` over the real line, to be compared
    /// with `s int A`.
    pub fn carey_reconstruction(&self, s: f64) -> Result<ContinuumCarey> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument("Carey reconstruction needs s > 0"));
        }
        let lhs = self.density.integral() * c(s, 0.0);
        let m = self.rank();
        let mut rhs = CMatrix::zeros(m, m);
        for (j, w) in self.density.weights().into_iter().enumerate() {
            rhs += self.signed_xi_at_node(j, s)? * c(w, 0.0);
        }
        rhs += self.exterior_integral(s, |_| 1.0)?;
        let deviation = norm(&(&lhs - &rhs));
        Ok(ContinuumCarey { lhs, rhs, deviation })
    }

    /// Rows `(s, Xi_+(lambda, s) + Xi_-(lambda, -s), I + 2 (pi s)^{-1} Im T^{-1}, gap)`.
    pub fn strong_coupling_profile(&self, lambda: f64, s_list: &[f64]) -> Result<Vec<StrongCouplingRow>> {
        let m = self.rank();
        let t = self.t_boundary(lambda, Side::Plus)?;
        let sv = singular_values(&t);
        if sv[sv.len() - 1] <= 1e-10 * sv[0].max(f64::MIN_POSITIVE) {
            return Err(Error::NotInLambda);
        }
        let t_inv = inverse(&t).ok_or(Error::NotInLambda)?;
        let im_inv = imag_part(&t_inv);
        s_list
            .iter()
            .map(|&s| {
                if !(s > 0.0) {
                    return Err(Error::InvalidArgument("couplings must be positive"));
                }
                let lhs = self.xsso_pm(lambda, s)? + self.xsso_pm(lambda, -s)?;
                let rhs = identity(m) + &im_inv * c(2.0 / (PI * s), 0.0);
                let gap = norm(&(&lhs - &rhs));
                Ok(StrongCouplingRow { s, lhs, rhs, gap })
            })
            .collect()
    }

    /// `xi(lambda; H0, H0 + sV) - xi(lambda; H0, H0 - sV)` for each `s`.
    pub fn simon_limit(&self, lambda: f64, s_list: &[f64]) -> Result<Vec<f64>> {
        s_list
            .iter()
            .map(|&s| Ok(trace(&(self.xsso_pm(lambda, s)? + self.xsso_pm(lambda, -s)?)).re))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScatteringSample {
    pub lambda: f64,
    /// `Phi(lambda + i0)^{-1} Phi(lambda - i0)`.
    pub s: CMatrix,
    /// The unitary representative on `ran A(lambda)`, similar to `s` there
    /// and equal to `I` on `ker A(lambda)`.
    pub s_eff: CMatrix,
    /// `Im log det Phi(lambda + i0) / pi`, tracked continuously in the coupling.
    pub xi: f64,
    /// `Xi_+` for positive coupling, `Xi_-` for negative coupling.
    pub xi_op: CMatrix,
    /// `||S_eff* S_eff - I||`.
    pub unitarity: f64,
}

#[derive(Debug, Clone)]
pub struct StrongCouplingRow {
    pub s: f64,
    pub lhs: CMatrix,
    pub rhs: CMatrix,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuumCarey {
    pub lhs: CMatrix,
    pub rhs: CMatrix,
    pub deviation: f64,
}

fn signed_xi(phi: &CMatrix, s: f64) -> Result<CMatrix> {
    let sigma_min = *singular_values(phi).last().expect("non-empty");
    if sigma_min <= SINGULAR_TOL {
        return Err(Error::Singular { sigma_min });
    }
    let log = if s > 0.0 { log_dissipative(phi)? } else { log_antidissipative(phi)? };
    let im = imag_part(&log.value) * c(1.0 / PI, 0.0);
    Ok((&im + im.adjoint()) * c(0.5, 0.0))
}

fn lowest_projection(op: &HermitianOperator, k: usize) -> CMatrix {
    let u = op.eigenvectors();
    let cols = u.columns(0, k);
    &cols * cols.adjoint()
}

/// `arg f(s)` followed continuously from `f(0) = 1`.
fn tracked_arg<F: FnMut(f64) -> C64>(mut f: F, s: f64) -> Result<f64> {
    let mut arg = 0.0;
    let mut prev = c(1.0, 0.0);
    let mut at = 0.0;
    let mut step = s / 64.0;
    while (s - at) * s.signum() > 0.0 {
        let next_at = if ((s - at) - step) * s.signum() <= 0.0 { s } else { at + step };
        let v = f(next_at);
        if v.norm() < 1e-12 {
            return Err(Error::ArgTrackingLost { modulus: v.norm() });
        }
        let d = (v / prev).arg();
        if d.abs() > 0.5 && (next_at - at).abs() > 1e-12 * s.abs() {
            step *= 0.5;
            continue;
        }
        arg += d;
        prev = v;
        at = next_at;
        if d.abs() < 0.1 {
            step *= 2.0;
        }
    }
    Ok(arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        let u = 1.0 - x * x;
        if u > 0.0 { u * u } else { 0.0 }
    }

    fn rank_one(nodes: usize) -> ContinuumModel {
        ContinuumModel::from_fn(-1.0, 1.0, nodes, |x| CMatrix::from_element(1, 1, c(bump(x), 0.0))).unwrap()
    }

    #[test]
    fn symmetric_density_has_no_pv_at_centre() {
        let model = rank_one(257);
        let t = model.t_boundary(0.0, Side::Plus).unwrap();
        // the node derivative comes from a one-sided stencil
        assert!(t[(0, 0)].re.abs() < 1e-7);
        assert!((t[(0, 0)].im - PI).abs() < 1e-12);
    }

    #[test]
    fn rank_one_xi_matches_argument() {
        let model = rank_one(513);
        let lambda = 0.3;
        let s = 2.5;
        let tau = model.t_boundary(lambda, Side::Plus).unwrap()[(0, 0)];
        let expect = (c(1.0, 0.0) + tau * s).arg() / PI;
        let xi = model.xsso_pm(lambda, s).unwrap()[(0, 0)].re;
        assert!((xi - expect).abs() < 1e-12);
        let sample = model.scattering_matrix(lambda, s).unwrap();
        assert!((sample.xi - expect).abs() < 1e-12);
        assert!(sample.unitarity < 1e-12);
        assert!(model.birman_krein_residual(lambda, s).unwrap() < 1e-12);
        assert!(model.birman_krein_residual(lambda, -s).unwrap() < 1e-12);
    }

    #[test]
    fn rank_two_identities() {
        let model = ContinuumModel::from_fn(-1.0, 1.0, 513, |x| {
            let b = bump(x);
            CMatrix::from_row_slice(2, 2, &[c(b * (1.5 + x), 0.0), c(0.1 * b, 0.1 * b * x), c(0.1 * b, -0.1 * b * x), c(b * (1.2 - x * x), 0.0)])
        })
        .unwrap();
        for l in [-0.5, 0.0, 0.3, 0.7] {
            assert!(model.birman_krein_residual(l, 1.5).unwrap() < 1e-12);
            assert!(model.birman_krein_residual(l, -0.7).unwrap() < 1e-12);
            assert!(model.lemma47_residual(l, 1.5).unwrap() < 1e-7);
            assert!(model.lemma47_residual(l, -0.7).unwrap() < 1e-4);
            assert!(model.scattering_matrix(l, 1.5).unwrap().unitarity < 1e-12);
        }
        assert!(model.carey_reconstruction(1.5).unwrap().deviation < 1e-8);
    }

    #[test]
    fn strong_coupling_pushes_xi_past_the_support() {
        let model = rank_one(513);
        let t_edge = model.t_outside(1.0).unwrap()[(0, 0)].re;
        let s = 4.0 / t_edge.abs();
        assert!(1.0 + s * t_edge < 0.0);
        assert!(model.exterior_integral(s, |_| 1.0).unwrap()[(0, 0)].re > 0.1);
        assert!(model.carey_reconstruction(s).unwrap().deviation < 1e-8);
        assert!(model.lemma47_residual(0.2, s).unwrap() < 1e-6);
        assert!(model.lemma47_residual(0.2, -s).unwrap() < 1e-4);
    }

    #[test]
    fn endpoint_mass_is_rejected() {
        let r = ContinuumModel::from_fn(0.0, 1.0, 300, |_| CMatrix::from_element(1, 1, c(1.0, 0.0)));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = ContinuumModel::from_fn(0.0, 1.0, 100, |x| CMatrix::from_element(1, 1, c(bump(2.0 * x - 1.0), 0.0)));
        assert!(matches!(r, Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn strong_coupling_scalar_expansion() {
        let model = rank_one(513);
        let rows = model.strong_coupling_profile(0.1, &[1e2, 2e2]).unwrap();
        let ratio = rows[0].gap / rows[1].gap;
        // the remainder is odd in 1/s, so the first correction is cubic
        assert!((ratio - 8.0).abs() < 0.1, "ratio {ratio}");
    }
}
