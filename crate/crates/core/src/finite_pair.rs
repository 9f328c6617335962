//! Finite self-adjoint pairs `H = H0 + K J K*` and their spectral shift
//! operators `Xi_+(lambda)`, `Xi_-(lambda)`.
//!
//! Conventions: `xi(lambda) = N_{H0}(lambda) - N_H(lambda)` with `N` the
//! number of eigenvalues `<= lambda`; `tr Xi_+ = N_{H0} - N_{H+}` and
//! `tr Xi_- = N_H - N_{H+}`, where `H+ = H0 + K J+ K*`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::branchlog::{log_antidissipative, log_dissipative, negative_spectral_projection};
use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, identity, imag_part, inverse, norm, real_part, trace, trace_norm, CMatrix,
    HermitianOperator, ResolventSandwich, C64,
};
use crate::quad;
use crate::step::StepFunction;

/// Distance from the spectra below which a point counts as a pole.
pub const POLE_MARGIN: f64 = 1e-8;
const INVOLUTION_TOL: f64 = 1e-10;

/// `V = K J K*` with `J` a self-adjoint involution, stored in the basis
/// where `J = diag(+1, ..., +1, -1, ..., -1)`.
#[derive(Debug, Clone)]
pub struct FactoredPerturbation {
    k: CMatrix,
    j: CMatrix,
    basis: CMatrix,
    k_rot: CMatrix,
    signs: Vec<f64>,
    m_plus: usize,
}

impl FactoredPerturbation {
    pub fn new(k: CMatrix, j: CMatrix) -> Result<Self> {
        let m = k.ncols();
        if m == 0 || j.shape() != (m, m) {
            return Err(Error::Dimension("J must be m x m for K of shape n x m"));
        }
        let scale = norm(&j).max(1.0);
        let skew = norm(&(&j - j.adjoint()));
        let square = norm(&(&j * &j - identity(m)));
        if skew > 1e-12 * scale || square > INVOLUTION_TOL {
            return Err(Error::BadInvolution { residual: skew.max(square) });
        }
        let op = HermitianOperator::new(j.clone()).map_err(|_| Error::BadInvolution { residual: skew })?;
        // eigenvalues ascend: the -1 block comes first, reorder to (+, -)
        let m_minus = op.eigenvalues().partition_point(|&e| e < 0.0);
        let m_plus = m - m_minus;
        let order: Vec<usize> = (m_minus..m).chain(0..m_minus).collect();
        let basis = CMatrix::from_fn(m, m, |r, col| op.eigenvectors()[(r, order[col])]);
        let signs: Vec<f64> = (0..m).map(|i| if i < m_plus { 1.0 } else { -1.0 }).collect();
        let k_rot = &k * &basis;
        Ok(Self { k, j, basis, k_rot, signs, m_plus })
    }

    /// `J = I`: a nonnegative perturbation `K K*`.
    pub fn positive(k: CMatrix) -> Result<Self> {
        let m = k.ncols();
        Self::new(k, identity(m))
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn dims(&self) -> (usize, usize) {
        self.k.shape()
    }

    pub fn rank_plus(&self) -> usize {
        self.m_plus
    }

    pub fn rank_minus(&self) -> usize {
        self.signs.len() - self.m_plus
    }

    /// Orthogonal projections `J+`, `J-` in the original factor basis.
    pub fn j_projections(&self) -> (CMatrix, CMatrix) {
        let m = self.signs.len();
        let p = |keep_plus: bool| {
            let d = CMatrix::from_fn(m, m, |i, k| {
                if i == k && ((i < self.m_plus) == keep_plus) {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            &self.basis * d * self.basis.adjoint()
        };
        (p(true), p(false))
    }

    /// Columns of `K` (rotated) spanning `ran(J+)`.
    pub fn k_plus(&self) -> CMatrix {
        self.k_rot.columns(0, self.m_plus).into_owned()
    }

    pub fn k_minus(&self) -> CMatrix {
        self.k_rot.columns(self.m_plus, self.rank_minus()).into_owned()
    }

    fn outer(k: &CMatrix) -> CMatrix {
        real_part(&(k * k.adjoint()))
    }
}

/// The pair `(H0, H)` with the intermediate operator `H+ = H0 + V+`.
#[derive(Debug, Clone)]
pub struct PairModel {
    h0: HermitianOperator,
    pert: FactoredPerturbation,
    v: CMatrix,
    v_plus: CMatrix,
    v_minus: CMatrix,
    h_plus: HermitianOperator,
    h: HermitianOperator,
    h0_full: ResolventSandwich,
    h0_plus: ResolventSandwich,
    hplus_minus: ResolventSandwich,
}

/// `Phi(z)`, `Phi_+(z)` and `tilde Phi_-(z)`.
#[derive(Debug, Clone)]
pub struct PhiMaps {
    pub phi: CMatrix,
    pub phi_plus: CMatrix,
    pub phi_tilde_minus: CMatrix,
}

/// Spectral shift operators at one real point.
#[derive(Debug, Clone)]
pub struct SpectralShiftSample {
    pub lambda: f64,
    pub xi_plus: CMatrix,
    pub xi_minus: CMatrix,
    pub xi: f64,
    /// (min, max) eigenvalue of `Xi_+`; `(0, 0)` on an empty block.
    pub plus_range: (f64, f64),
    pub minus_range: (f64, f64),
}

impl SpectralShiftSample {
    fn assemble(lambda: f64, xi_plus: CMatrix, xi_minus: CMatrix) -> Self {
        let xi = trace(&xi_plus).re - trace(&xi_minus).re;
        let plus_range = eig_range(&xi_plus);
        let minus_range = eig_range(&xi_minus);
        Self { lambda, xi_plus, xi_minus, xi, plus_range, minus_range }
    }
}

fn eig_range(a: &CMatrix) -> (f64, f64) {
    if a.nrows() == 0 {
        return (0.0, 0.0);
    }
    let e = hermitian_eigenvalues(&real_part(a));
    (e[0], e[e.len() - 1])
}

/// Which counting difference [`PairModel::xi_counting`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `N_{H0} - N_H`
    Full,
    /// `N_{H0} - N_{H+}`
    Plus,
    /// `N_{H+} - N_H`, which equals `-tr Xi_-`
    Minus,
}

/// Both sides of a trace identity.
#[derive(Debug, Clone, Copy)]
pub struct TraceCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

impl TraceCheck {
    fn new(lhs: C64, rhs: C64) -> Self {
        Self { lhs, rhs, residual: (lhs - rhs).norm() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SumRule {
    pub integral_xi: f64,
    pub trace_v: f64,
    pub integral_abs_xi: f64,
    pub trace_norm_v: f64,
}

impl PairModel {
    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn h(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn h_plus(&self) -> &HermitianOperator {
        &self.h_plus
    }

    pub fn perturbation(&self) -> &FactoredPerturbation {
        &self.pert
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn v_plus(&self) -> &CMatrix {
        &self.v_plus
    }

    pub fn v_minus(&self) -> &CMatrix {
        &self.v_minus
    }

    /// Maps an operator on `ran(J+)` (rotated basis) into the original
    /// `m x m` factor space.
    pub fn embed_plus(&self, x: &CMatrix) -> CMatrix {
        let u = self.pert.basis.columns(0, self.pert.m_plus);
        &u * x * u.adjoint()
    }

    pub fn embed_minus(&self, x: &CMatrix) -> CMatrix {
        let u = self.pert.basis.columns(self.pert.m_plus, self.pert.rank_minus());
        &u * x * u.adjoint()
    }

    fn dist(&self, z: C64, ops: &[&HermitianOperator]) -> f64 {
        ops.iter().map(|o| o.distance_to_spectrum(z)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance from `z` to the spectra of `H0`, `H+` and `H`.
    pub fn distance_to_spectra(&self, z: C64) -> f64 {
        self.dist(z, &[&self.h0, &self.h_plus, &self.h])
    }

    pub fn is_regular(&self, lambda: f64) -> bool {
        self.distance_to_spectra(c(lambda, 0.0)) > POLE_MARGIN
    }

    fn check_poles(&self, z: C64, ops: &[&HermitianOperator]) -> Result<()> {
        let d = self.dist(z, ops);
        if d <= POLE_MARGIN {
            return Err(Error::PoleProximity { distance: d });
        }
        Ok(())
    }

    fn phi_plus_unchecked(&self, z: C64) -> CMatrix {
        let mp = self.pert.rank_plus();
        identity(mp) + self.h0_plus.at(z)
    }

    fn phi_tilde_minus_unchecked(&self, z: C64) -> CMatrix {
        let mm = self.pert.rank_minus();
        identity(mm) - self.hplus_minus.at(z)
    }

    pub fn phi_maps(&self, z: C64) -> Result<PhiMaps> {
        self.check_poles(z, &[&self.h0, &self.h_plus])?;
        let m = self.pert.signs.len();
        let jd = CMatrix::from_fn(m, m, |i, k| if i == k { c(self.pert.signs[i], 0.0) } else { c(0.0, 0.0) });
        let phi_rot = jd + self.h0_full.at(z);
        let phi = &self.pert.basis * phi_rot * self.pert.basis.adjoint();
        Ok(PhiMaps { phi, phi_plus: self.phi_plus_unchecked(z), phi_tilde_minus: self.phi_tilde_minus_unchecked(z) })
    }

    /// Residuals of the three inverse identities
    /// `Phi^{-1} = J - J K*(H - z)^{-1} K J`,
    /// `Phi_+^{-1} = I - K+*(H+ - z)^{-1} K+`,
    /// `tilde Phi_-^{-1} = I + K-*(H - z)^{-1} K-`.
    pub fn inverse_identity_residuals(&self, z: C64) -> Result<[f64; 3]> {
        self.check_poles(z, &[&self.h0, &self.h_plus, &self.h])?;
        let maps = self.phi_maps(z)?;
        let j = &self.pert.j;
        let k = &self.pert.k;
        let rh = self.h.resolvent(z);
        let inv_phi = j - j * k.adjoint() * &rh * k * j;
        let m = j.nrows();
        let r0 = norm(&(&maps.phi * inv_phi - identity(m)));

        let kp = self.pert.k_plus();
        let km = self.pert.k_minus();
        let inv_plus = identity(kp.ncols()) - kp.adjoint() * self.h_plus.resolvent(z) * &kp;
        let r1 = if kp.ncols() == 0 { 0.0 } else { norm(&(&maps.phi_plus * inv_plus - identity(kp.ncols()))) };
        let inv_minus = identity(km.ncols()) + km.adjoint() * &rh * &km;
        let r2 =
            if km.ncols() == 0 { 0.0 } else { norm(&(&maps.phi_tilde_minus * inv_minus - identity(km.ncols()))) };
        Ok([r0, r1, r2])
    }

    /// `(min eig Im Phi_+(z), max eig Im tilde Phi_-(z))`.
    pub fn herglotz_margins(&self, z: C64) -> Result<(f64, f64)> {
        let maps = self.phi_maps(z)?;
        let lo = hermitian_eigenvalues(&imag_part(&maps.phi_plus)).first().copied().unwrap_or(0.0);
        let hi = hermitian_eigenvalues(&imag_part(&maps.phi_tilde_minus)).last().copied().unwrap_or(0.0);
        Ok((lo, hi))
    }

    pub fn xi_counting(&self, which: Which) -> StepFunction {
        let (a, b) = match which {
            Which::Full => (&self.h0, &self.h),
            Which::Plus => (&self.h0, &self.h_plus),
            Which::Minus => (&self.h_plus, &self.h),
        };
        StepFunction::counting_difference(a.eigenvalues(), b.eigenvalues())
    }

    /// Boundary values at `epsilon = 0` through negative spectral projections
    /// of the Hermitian matrices `Phi_+(lambda)` and `tilde Phi_-(lambda)`.
    pub fn spectral_shift_operators(&self, lambda: f64) -> Result<SpectralShiftSample> {
        self.check_poles(c(lambda, 0.0), &[&self.h0, &self.h_plus, &self.h])?;
        let z = c(lambda, 0.0);
        let xp = negative_projection_block(&self.phi_plus_unchecked(z))?;
        let xm = negative_projection_block(&self.phi_tilde_minus_unchecked(z))?;
        Ok(SpectralShiftSample::assemble(lambda, xp, xm))
    }

    /// The same operators from logarithms at `lambda + i eps`.
    pub fn spectral_shift_operators_eps(&self, lambda: f64, eps: f64) -> Result<SpectralShiftSample> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument("eps must be positive"));
        }
        let z = c(lambda, eps);
        let pp = self.phi_plus_unchecked(z);
        let xp = if pp.nrows() == 0 { pp } else { imag_part(&log_dissipative(&pp)?.value) / c(core::f64::consts::PI, 0.0) };
        let pm = self.phi_tilde_minus_unchecked(z);
        let xm = if pm.nrows() == 0 {
            pm
        } else {
            -imag_part(&log_antidissipative(&pm)?.value) / c(core::f64::consts::PI, 0.0)
        };
        Ok(SpectralShiftSample::assemble(lambda, xp, xm))
    }

    /// `det(I + V (H0 - z)^{-1})`, evaluated as `det(I_m + J K*(H0 - z)^{-1} K)`.
    pub fn perturbation_determinant(&self, z: C64) -> C64 {
        let m = self.pert.signs.len();
        let mut a = self.h0_full.at(z);
        for i in 0..m {
            let s = self.pert.signs[i];
            for col in 0..m {
                a[(i, col)] *= s;
            }
        }
        a += identity(m);
        crate::linalg::det(&a)
    }

    /// `pi^{-1} Im log det(I + V (H0 - lambda - i eps)^{-1})` with the argument
    /// followed continuously down from a height where the determinant is
    /// within 1/2 of one.
    pub fn xi_from_determinant(&self, lambda: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument("eps must be positive"));
        }
        let start = 1f64.max(2.0 * trace_norm(&self.v)).max(eps);
        let det_at = |e: f64| self.perturbation_determinant(c(lambda, e));
        let mut cur = det_at(start);
        let mut arg = cur.arg();
        let mut log_e = start.ln();
        let target = eps.ln();
        let mut step = core::f64::consts::LN_2;
        while log_e > target {
            let next_log = (log_e - step).max(target);
            let next = det_at(next_log.exp());
            if next.norm() < 1e-12 {
                return Err(Error::ArgTrackingLost { modulus: next.norm() });
            }
            let delta = (next / cur).arg();
            if delta.abs() > 0.5 && step > 1e-9 {
                step *= 0.5;
                continue;
            }
            arg += delta;
            cur = next;
            log_e = next_log;
            step = (step * 2.0).min(core::f64::consts::LN_2);
        }
        Ok(arg / core::f64::consts::PI)
    }

    /// Krein's trace formula at `z`: `tr((H - z)^{-1} - (H0 - z)^{-1})` against
    /// `-int xi(lambda) (lambda - z)^{-2} d lambda`.
    pub fn krein_resolvent_residual(&self, z: C64) -> Result<TraceCheck> {
        self.check_poles(z, &[&self.h0, &self.h])?;
        let n = self.h0.dim();
        let shift = |a: &CMatrix| a - identity(n) * z;
        let rh = inverse(&shift(self.h.matrix())).ok_or(Error::Singular { sigma_min: 0.0 })?;
        let r0 = inverse(&shift(self.h0.matrix())).ok_or(Error::Singular { sigma_min: 0.0 })?;
        let lhs = trace(&(rh - r0));
        let xi = self.xi_counting(Which::Full);
        let (lo, hi) = self.spectral_hull();
        let integral: C64 = xi.integrate_antiderivative(lo, hi, |x| -(c(x, 0.0) - z).inv());
        Ok(TraceCheck::new(lhs, -integral))
    }

    /// `[min, max]` of the union of all three spectra.
    pub fn spectral_hull(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for op in [&self.h0, &self.h_plus, &self.h] {
            lo = lo.min(op.eigenvalues()[0]);
            hi = hi.max(*op.eigenvalues().last().expect("non-empty"));
        }
        (lo, hi)
    }

    /// `tr(f(H) - f(H0))` against `int xi f'` for a sampled `f`.
    pub fn trace_formula_residual(&self, f: &SampledFunction) -> Result<TraceCheck> {
        let margin = 2.0 * f.spacing();
        let (lo, hi) = self.spectral_hull();
        if lo < f.a + margin || hi > f.b - margin {
            return Err(Error::SupportTooSmall);
        }
        let tr = |op: &HermitianOperator| op.eigenvalues().iter().fold(c(0.0, 0.0), |acc, &e| acc + f.value_at(e));
        let lhs = tr(&self.h) - tr(&self.h0);
        let xi = self.xi_counting(Which::Full);
        let rhs: C64 = xi.integrate_antiderivative(lo, hi, |x| f.derivative_primitive(x));
        Ok(TraceCheck::new(lhs, rhs))
    }

    pub fn sum_rule(&self) -> SumRule {
        let xi = self.xi_counting(Which::Full);
        SumRule {
            integral_xi: xi.integral().unwrap_or(f64::NAN),
            trace_v: trace(&self.v).re,
            integral_abs_xi: xi.abs_integral().unwrap_or(f64::NAN),
            trace_norm_v: trace_norm(&self.v),
        }
    }

    fn tr_log_plus(&self, z: C64) -> Result<C64> {
        let p = self.phi_plus_unchecked(z);
        tr_log(&p, z.im > 0.0)
    }

    fn tr_log_minus(&self, z: C64) -> Result<C64> {
        let p = self.phi_tilde_minus_unchecked(z);
        tr_log(&p, z.im < 0.0)
    }

    /// `(res_plus, res_minus)` comparing `d/dz tr log Phi_+(z)` with
    /// `tr((H0 - z)^{-1} - (H+ - z)^{-1})` and `d/dz tr log tilde Phi_-(z)`
    /// with `tr((H+ - z)^{-1} - (H - z)^{-1})`; derivatives by central
    /// differences.
    pub fn logphi_derivative_residual(&self, z: C64) -> Result<(f64, f64)> {
        if z.im == 0.0 {
            return Err(Error::InvalidArgument("z must be non-real"));
        }
        let h = 1e-5 * (1.0 + z.norm());
        if h >= z.im.abs() {
            return Err(Error::PoleProximity { distance: z.im.abs() });
        }
        let dz = c(h, 0.0);
        let d_plus = (self.tr_log_plus(z + dz)? - self.tr_log_plus(z - dz)?) / (2.0 * h);
        let d_minus = (self.tr_log_minus(z + dz)? - self.tr_log_minus(z - dz)?) / (2.0 * h);
        let tr_res = |op: &HermitianOperator| op.eigenvalues().iter().fold(c(0.0, 0.0), |a, &e| a + (c(e, 0.0) - z).inv());
        let res_plus = (tr_res(&self.h0) - tr_res(&self.h_plus) - d_plus).norm();
        let res_minus = (tr_res(&self.h_plus) - tr_res(&self.h) - d_minus).norm();
        Ok((res_plus, res_minus))
    }

    /// `(int_a^b Xi_+, int_a^b Xi_-)` by adaptive quadrature between the
    /// eigenvalues where the projections jump.
    pub fn xi_window_integrals(&self, a: f64, b: f64, tol: f64) -> Result<(CMatrix, CMatrix)> {
        let plus = window_integral(a, b, tol, &[&self.h0, &self.h_plus], self.pert.rank_plus(), |x| {
            self.phi_plus_unchecked(c(x, 0.0))
        })?;
        let minus = window_integral(a, b, tol, &[&self.h_plus, &self.h], self.pert.rank_minus(), |x| {
            self.phi_tilde_minus_unchecked(c(x, 0.0))
        })?;
        Ok((plus, minus))
    }
}

fn tr_log(p: &CMatrix, dissipative: bool) -> Result<C64> {
    if p.nrows() == 0 {
        return Ok(c(0.0, 0.0));
    }
    let l = if dissipative { log_dissipative(p)? } else { log_antidissipative(p)? };
    Ok(trace(&l.value))
}

fn negative_projection_block(m: &CMatrix) -> Result<CMatrix> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    negative_spectral_projection(&HermitianOperator::new(real_part(m))?)
}

/// Negative projection without the exclusion band; for quadrature nodes,
/// where a near-zero eigenvalue has no effect on the integral.
fn negative_projection_loose(m: &CMatrix) -> CMatrix {
    match HermitianOperator::new(real_part(m)) {
        Ok(op) => op.spectral_projection(|e| e < 0.0),
        Err(_) => CMatrix::from_element(m.nrows(), m.ncols(), c(f64::NAN, f64::NAN)),
    }
}

fn window_integral<F: Fn(f64) -> CMatrix>(
    a: f64,
    b: f64,
    tol: f64,
    ops: &[&HermitianOperator],
    dim: usize,
    phi: F,
) -> Result<CMatrix> {
    if dim == 0 || !(b > a) {
        return Ok(CMatrix::zeros(dim, dim));
    }
    let mut pts: Vec<f64> = alloc::vec![a, b];
    for op in ops {
        pts.extend(op.eigenvalues().iter().copied().filter(|&e| e > a && e < b));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let v = quad::adaptive_pieces(|x| negative_projection_loose(&phi(x)), &pts, tol, 1 << 14)?;
    let v = v.unwrap_or_else(|| CMatrix::zeros(dim, dim));
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::QuadratureFailure { panels: 1 << 14 });
    }
    Ok(real_part(&v))
}

pub fn build_pair(h0: HermitianOperator, k: CMatrix, j: CMatrix) -> Result<PairModel> {
    if k.nrows() != h0.dim() {
        return Err(Error::Dimension("K must have as many rows as H0"));
    }
    let pert = FactoredPerturbation::new(k, j)?;
    let kp = pert.k_plus();
    let km = pert.k_minus();
    let v_plus = FactoredPerturbation::outer(&kp);
    let v_minus = FactoredPerturbation::outer(&km);
    let v = &v_plus - &v_minus;
    let h_plus = HermitianOperator::new(h0.matrix() + &v_plus)?;
    let h = HermitianOperator::new(h0.matrix() + &v)?;
    let h0_full = h0.sandwich(&pert.k_rot);
    let h0_plus = h0.sandwich(&kp);
    let hplus_minus = h_plus.sandwich(&km);
    Ok(PairModel { h0, pert, v, v_plus, v_minus, h_plus, h, h0_full, h0_plus, hplus_minus })
}

/// A smooth complex function and its derivative sampled on a uniform grid.
/// Values come from cubic Hermite interpolation of `(f, f')`; the primitive
/// of `f'` from piecewise-cubic interpolation of the `f'` samples alone, so
/// the two sides of a trace identity use independent interpolants.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    a: f64,
    b: f64,
    f: Vec<C64>,
    df: Vec<C64>,
    cumulative: Vec<C64>,
}

impl SampledFunction {
    pub fn new(a: f64, b: f64, f: Vec<C64>, df: Vec<C64>) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument("grid must satisfy a < b"));
        }
        if f.len() != df.len() || f.len() < 8 {
            return Err(Error::GridTooCoarse { nodes: f.len().min(df.len()), required: 8 });
        }
        let mut s = Self { a, b, f, df, cumulative: Vec::new() };
        let n = s.f.len();
        let mut cum = Vec::with_capacity(n);
        cum.push(c(0.0, 0.0));
        for k in 0..n - 1 {
            let lo = s.node(k);
            let hi = s.node(k + 1);
            let prev = *cum.last().expect("non-empty");
            cum.push(prev + s.cell_integral(k, lo, hi));
        }
        s.cumulative = cum;
        Ok(s)
    }

    pub fn from_fn<F, D>(a: f64, b: f64, nodes: usize, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> C64,
        D: Fn(f64) -> C64,
    {
        let h = (b - a) / (nodes.max(2) - 1) as f64;
        let xs: Vec<f64> = (0..nodes).map(|k| a + h * k as f64).collect();
        Self::new(a, b, xs.iter().map(|&x| f(x)).collect(), xs.iter().map(|&x| df(x)).collect())
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.f.len() - 1) as f64
    }

    fn node(&self, k: usize) -> f64 {
        self.a + self.spacing() * k as f64
    }

    fn cell(&self, x: f64) -> usize {
        let t = ((x - self.a) / self.spacing()).floor();
        (t.max(0.0) as usize).min(self.f.len() - 2)
    }

    pub fn value_at(&self, x: f64) -> C64 {
        let k = self.cell(x);
        let h = self.spacing();
        let t = (x - self.node(k)) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.f[k] * h00 + self.df[k] * (h10 * h) + self.f[k + 1] * h01 + self.df[k + 1] * (h11 * h)
    }

    /// Four-point Lagrange interpolant of `f'` serving cell `k`.
    fn derivative_interp(&self, k: usize, x: f64) -> C64 {
        let n = self.f.len();
        let base = (k as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = (x - self.node(base)) / self.spacing();
        let mut acc = c(0.0, 0.0);
        for i in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if j != i {
                    w *= (u - j as f64) / (i as f64 - j as f64);
                }
            }
            acc += self.df[base + i] * w;
        }
        acc
    }

    fn cell_integral(&self, k: usize, lo: f64, hi: f64) -> C64 {
        // two-point Gauss is exact for the cubic interpolant
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let off = half / 3f64.sqrt();
        (self.derivative_interp(k, mid - off) + self.derivative_interp(k, mid + off)) * half
    }

    /// `int_a^x f'` through the interpolant of the derivative samples.
    pub fn derivative_primitive(&self, x: f64) -> C64 {
        let k = self.cell(x);
        self.cumulative[k] + self.cell_integral(k, self.node(k), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(v.len(), 1, |i, _| c(v[i], 0.0))
    }

    #[test]
    fn rank_one_positive_example() {
        let h0 = HermitianOperator::from_real_diagonal(&[0.0, 2.0]);
        let pair = build_pair(h0, col(&[1.0, 0.0]), identity(1)).unwrap();
        assert!((pair.h().eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!(norm(pair.v_minus()) == 0.0);
        let xi = pair.xi_counting(Which::Full);
        assert_eq!(xi.value_at(0.5), 1);
        assert_eq!(xi.value_at(1.5), 0);
    }

    #[test]
    fn scalar_shift_operators() {
        let t = 0.7;
        let pair = build_pair(HermitianOperator::from_real_diagonal(&[0.0]), col(&[t.sqrt()]), identity(1)).unwrap();
        let s = pair.spectral_shift_operators(0.3).unwrap();
        assert!((s.xi - 1.0).abs() < 1e-14);
        let s = pair.spectral_shift_operators(-0.3).unwrap();
        assert!(s.xi.abs() < 1e-14);
        let d = pair.xi_from_determinant(0.3, 1e-8).unwrap();
        assert!((d - 1.0).abs() < 1e-4);
    }

    #[test]
    fn negative_block_flips_sign() {
        let pair =
            build_pair(HermitianOperator::from_real_diagonal(&[0.0]), col(&[1.0]), -identity(1)).unwrap();
        let s = pair.spectral_shift_operators(-0.5).unwrap();
        assert!((s.xi + 1.0).abs() < 1e-14);
        assert_eq!(pair.xi_counting(Which::Full).value_at(-0.5), -1);
    }

    #[test]
    fn rejects_non_involution() {
        let h0 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let j = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![c(2.0, 0.0)]));
        assert!(matches!(build_pair(h0, col(&[1.0, 1.0]), j), Err(Error::BadInvolution { .. })));
    }

    #[test]
    fn sampled_function_is_accurate() {
        let f = SampledFunction::from_fn(0.0, 3.0, 301, |x| c(x.sin(), 0.0), |x| c(x.cos(), 0.0)).unwrap();
        assert!((f.value_at(1.234).re - 1.234f64.sin()).abs() < 1e-9);
        assert!((f.derivative_primitive(2.5).re - 2.5f64.sin()).abs() < 1e-9);
    }
}
