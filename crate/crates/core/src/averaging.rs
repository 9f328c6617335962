//! Spectral averaging over a coupling constant, in integrated window form.
//!
//! For `H(s) = H0 + V(s)` the identity
//! `int ds tr(V'(s) E_{H(s)}((a, b])) = int_a^b (xi(., s2) - xi(., s1))`
//! and its operator-valued analogue are checked with Gauss–Legendre in `s`.
//! The `s`-integrand jumps whenever an eigenvalue of `H(s)` crosses a window
//! edge, so the `s`-range is split at those crossings first.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::branchlog::{log_antidissipative, log_dissipative};
use crate::error::{Error, Result};
use crate::finite_pair::build_pair;
use crate::linalg::{c, hermitian_sqrt, identity, norm, real_part, trace, CMatrix, HermitianOperator, C64};
use crate::quad::GaussLegendre;
use crate::step::StepFunction;

const EDGE_TOL: f64 = 1e-8;
const SCAN_SAMPLES: usize = 512;
const XI_TOL: f64 = 1e-11;

/// `s -> V(s)` with its derivative, over a coupling range.
pub trait CouplingFamily {
    fn h0(&self) -> &HermitianOperator;
    fn v(&self, s: f64) -> CMatrix;
    fn v_prime(&self, s: f64) -> CMatrix;
    fn s_range(&self) -> (f64, f64);

    fn h(&self, s: f64) -> Result<HermitianOperator> {
        HermitianOperator::new(self.h0().matrix() + self.v(s))
    }

    /// `||(V(s + h) - V(s)) / h - V'(s)||`, which should shrink like `h`.
    fn derivative_defect(&self, s: f64, h: f64) -> f64 {
        norm(&((self.v(s + h) - self.v(s)) / c(h, 0.0) - self.v_prime(s)))
    }
}

/// `V(s) = sum_k s^k C_k` with Hermitian coefficients.
#[derive(Debug, Clone)]
pub struct PolynomialFamily {
    h0: HermitianOperator,
    coeffs: Vec<CMatrix>,
    s_range: (f64, f64),
}

impl PolynomialFamily {
    pub fn new(h0: HermitianOperator, coeffs: Vec<CMatrix>, s_range: (f64, f64)) -> Result<Self> {
        let n = h0.dim();
        if coeffs.is_empty() || coeffs.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::Dimension("coefficients must match H0"));
        }
        if !(s_range.0 <= s_range.1) {
            return Err(Error::InvalidArgument("coupling range must satisfy s1 <= s2"));
        }
        let coeffs = coeffs.iter().map(real_part).collect();
        Ok(Self { h0, coeffs, s_range })
    }

    /// `V(s) = s V`.
    pub fn linear(h0: HermitianOperator, v: CMatrix, s_range: (f64, f64)) -> Result<Self> {
        let n = h0.dim();
        Self::new(h0, alloc::vec![CMatrix::zeros(n, n), v], s_range)
    }
}

impl CouplingFamily for PolynomialFamily {
    fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    fn v(&self, s: f64) -> CMatrix {
        let n = self.h0.dim();
        let mut acc = CMatrix::zeros(n, n);
        for coeff in self.coeffs.iter().rev() {
            acc = acc * c(s, 0.0) + coeff;
        }
        acc
    }

    fn v_prime(&self, s: f64) -> CMatrix {
        let n = self.h0.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (k, coeff) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * c(s, 0.0) + coeff * c(k as f64, 0.0);
        }
        acc
    }

    fn s_range(&self) -> (f64, f64) {
        self.s_range
    }
}

/// The spectral window `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub a: f64,
    pub b: f64,
}

impl SpectralWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument("window must satisfy a < b"));
        }
        Ok(Self { a, b })
    }

    fn projection(&self, h: &HermitianOperator) -> CMatrix {
        h.spectral_projection(|e| e > self.a && e <= self.b)
    }

    fn counts(&self, h: &HermitianOperator) -> (usize, usize) {
        (h.count_le(self.a), h.count_le(self.b))
    }
}

/// Coupling values in `(s1, s2)` where an eigenvalue of `H(s)` crosses an
/// edge of the window, located by scanning and bisection.
fn edge_crossings<H>(h_of: &H, s1: f64, s2: f64, window: &SpectralWindow) -> Result<Vec<f64>>
where
    H: Fn(f64) -> Result<HermitianOperator>,
{
    let mut out = Vec::new();
    if s2 <= s1 {
        return Ok(out);
    }
    let width = s2 - s1;
    let at = |s: f64| -> Result<(usize, usize)> { Ok(window.counts(&h_of(s)?)) };
    let mut prev_s = s1;
    let mut prev = at(s1)?;
    for k in 1..=SCAN_SAMPLES {
        let s = s1 + width * k as f64 / SCAN_SAMPLES as f64;
        let cur = at(s)?;
        if cur != prev {
            bisect(&at, prev_s, prev, s, cur, width * 1e-14, &mut out)?;
        }
        prev_s = s;
        prev = cur;
    }
    Ok(out)
}

fn bisect<A>(at: &A, lo: f64, clo: (usize, usize), hi: f64, chi: (usize, usize), tol: f64, out: &mut Vec<f64>) -> Result<()>
where
    A: Fn(f64) -> Result<(usize, usize)>,
{
    if hi - lo <= tol {
        out.push(0.5 * (lo + hi));
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    let cm = at(mid)?;
    if cm != clo {
        bisect(at, lo, clo, mid, cm, tol, out)?;
    }
    if cm != chi {
        bisect(at, mid, cm, hi, chi, tol, out)?;
    }
    Ok(())
}

/// Gauss–Legendre over each crossing-free piece of `[s1, s2]`.
fn split_average<H, F>(h_of: H, s1: f64, s2: f64, window: &SpectralWindow, nodes: usize, mut integrand: F) -> Result<CMatrix>
where
    H: Fn(f64) -> Result<HermitianOperator>,
    F: FnMut(f64, &CMatrix) -> CMatrix,
{
    if nodes < 8 {
        return Err(Error::InvalidArgument("at least 8 quadrature nodes are required"));
    }
    let mut pts = alloc::vec![s1];
    pts.extend(edge_crossings(&h_of, s1, s2, window)?);
    pts.push(s2);
    let rule = GaussLegendre::new(nodes);
    let guard = 1e-6 * (s2 - s1).abs();
    let mut acc: Option<CMatrix> = None;
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        for (s, wt) in rule.mapped(w[0], w[1]) {
            let h = h_of(s)?;
            // a node right on a crossing the scan could not see (a tangency)
            let near_end = (s - w[0]).min(w[1] - s) <= guard;
            if !near_end {
                for &edge in &[window.a, window.b] {
                    if h.distance_to_spectrum(c(edge, 0.0)) <= EDGE_TOL {
                        return Err(Error::EigenvalueCrossesWindowEdge { edge });
                    }
                }
            }
            let p = window.projection(&h);
            let v = integrand(s, &p) * c(wt, 0.0);
            acc = Some(match acc {
                Some(a) => a + v,
                None => v,
            });
        }
    }
    Ok(acc.unwrap_or_else(|| CMatrix::zeros(1, 1)))
}

/// `int_{s1}^{s2} tr(V'(s) [E_{H(s)}(b) - E_{H(s)}(a)]) ds`.
pub fn averaged_weight<F: CouplingFamily>(family: &F, window: &SpectralWindow, nodes: usize) -> Result<f64> {
    let (s1, s2) = family.s_range();
    if s2 == s1 {
        return Ok(0.0);
    }
    let v = split_average(|s| family.h(s), s1, s2, window, nodes, |s, p| {
        CMatrix::from_element(1, 1, trace(&(family.v_prime(s) * p)))
    })?;
    Ok(v[(0, 0)].re)
}

/// `int_a^b [xi(lambda, s2) - xi(lambda, s1)] d lambda` from counting functions.
pub fn xi_window_rhs<F: CouplingFamily>(family: &F, window: &SpectralWindow) -> Result<f64> {
    let (s1, s2) = family.s_range();
    let e0 = family.h0().eigenvalues();
    let xi1 = StepFunction::counting_difference(e0, family.h(s1)?.eigenvalues());
    let xi2 = StepFunction::counting_difference(e0, family.h(s2)?.eigenvalues());
    Ok(xi2.combine(1, &xi1, -1).integral_over(window.a, window.b))
}

/// `int_{s1}^{s2} K* [E(b) - E(a)](H0 + s K K*) K ds`.
pub fn operator_averaged_measure_range(
    h0: &HermitianOperator,
    k: &CMatrix,
    window: &SpectralWindow,
    nodes: usize,
    s_range: (f64, f64),
) -> Result<CMatrix> {
    if k.nrows() != h0.dim() {
        return Err(Error::Dimension("K must have as many rows as H0"));
    }
    let kk = k * k.adjoint();
    let h_of = |s: f64| HermitianOperator::new(h0.matrix() + &kk * c(s, 0.0));
    let (s1, s2) = s_range;
    if s2 <= s1 {
        return Ok(CMatrix::zeros(k.ncols(), k.ncols()));
    }
    let v = split_average(h_of, s1, s2, window, nodes, |_, p| k.adjoint() * p * k)?;
    Ok(real_part(&v))
}

/// The `s in [0, 1]` case of [`operator_averaged_measure_range`].
pub fn operator_averaged_measure(h0: &HermitianOperator, k: &CMatrix, window: &SpectralWindow, nodes: usize) -> Result<CMatrix> {
    operator_averaged_measure_range(h0, k, window, nodes, (0.0, 1.0))
}

/// `int_a^b Xi(lambda) d lambda` for the pair `(H0, H0 + s K K*)`, in the
/// original factor basis.
pub fn xi_window_integral(h0: &HermitianOperator, k: &CMatrix, s: f64, window: &SpectralWindow) -> Result<CMatrix> {
    if s < 0.0 {
        return Err(Error::InvalidArgument("coupling must be nonnegative"));
    }
    let m = k.ncols();
    if s == 0.0 {
        return Ok(CMatrix::zeros(m, m));
    }
    let pair = build_pair(h0.clone(), k * c(s.sqrt(), 0.0), identity(m))?;
    let (plus, _) = pair.xi_window_integrals(window.a, window.b, XI_TOL)?;
    Ok(pair.embed_plus(&plus))
}

/// Carey's reconstruction: `K* K` against `int Xi(lambda) d lambda`.
#[derive(Debug, Clone)]
pub struct CareyCheck {
    pub lhs: CMatrix,
    pub rhs: CMatrix,
    pub deviation: f64,
}

pub fn carey_reconstruction(h0: &HermitianOperator, k: &CMatrix) -> Result<CareyCheck> {
    let m = k.ncols();
    let lhs = k.adjoint() * k;
    let pair = build_pair(h0.clone(), k.clone(), identity(m))?;
    let (lo, hi) = pair.spectral_hull();
    let (plus, _) = pair.xi_window_integrals(lo - 1.0, hi + 1.0, XI_TOL)?;
    let rhs = pair.embed_plus(&plus);
    let deviation = norm(&(&lhs - &rhs));
    Ok(CareyCheck { lhs, rhs, deviation })
}

/// `|d/ds tr log Phi(z, s) - tr(V'(s)(H(s) - z)^{-1})|` where
/// `Phi(z, s) = I + K(s)*(H0 - z)^{-1} K(s)` and `K(s) = V(s)^{1/2}`.
pub fn coupling_derivative_residual<F: CouplingFamily>(family: &F, z: C64, s: f64) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::InvalidArgument("z must be non-real"));
    }
    let h = 1e-5;
    let h0 = family.h0();
    let n = h0.dim();
    let r0 = h0.resolvent(z);
    let tr_log = |sv: f64| -> Result<C64> {
        let k = hermitian_sqrt(&family.v(sv), 1e-10)?;
        let phi = identity(n) + k.adjoint() * &r0 * &k;
        let l = if z.im > 0.0 { log_dissipative(&phi)? } else { log_antidissipative(&phi)? };
        Ok(trace(&l.value))
    };
    let derivative = (tr_log(s + h)? - tr_log(s - h)?) / (2.0 * h);
    let hs = family.h(s)?;
    let expected = trace(&(family.v_prime(s) * hs.resolvent(z)));
    Ok((derivative - expected).norm())
}
