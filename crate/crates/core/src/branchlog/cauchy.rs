use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

const MIN_NODES: usize = 64;

/// A matrix-valued function sampled on a uniform grid over `[a, b]`,
/// extended by zero outside.
#[derive(Debug, Clone)]
pub struct SampledDensity {
    a: f64,
    b: f64,
    values: Vec<CMatrix>,
}

impl SampledDensity {
    pub fn new(a: f64, b: f64, values: Vec<CMatrix>) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument("support must satisfy a < b"));
        }
        if values.len() < 4 {
            return Err(Error::GridTooCoarse { nodes: values.len(), required: 4 });
        }
        let (r, cl) = values[0].shape();
        if r != cl || values.iter().any(|v| v.shape() != (r, cl)) {
            return Err(Error::Dimension("density samples must share one square shape"));
        }
        Ok(Self { a, b, values })
    }

    /// Samples `f` on `nodes` uniform points including both endpoints.
    pub fn from_fn<F: FnMut(f64) -> CMatrix>(a: f64, b: f64, nodes: usize, mut f: F) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::GridTooCoarse { nodes, required: 4 });
        }
        let h = (b - a) / (nodes - 1) as f64;
        let values = (0..nodes).map(|j| f(a + h * j as f64)).collect();
        Self::new(a, b, values)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.a + self.spacing() * j as f64
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    /// Four-point Lagrange stencil around `x`: (first index, weights, derivative weights).
    fn stencil(&self, x: f64) -> (usize, [f64; 4], [f64; 4]) {
        let h = self.spacing();
        let n = self.values.len();
        let t = (x - self.a) / h;
        let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = t - base as f64;
        let mut w = [0.0; 4];
        let mut dw = [0.0; 4];
        for i in 0..4 {
            let mut num = 1.0;
            let mut den = 1.0;
            for j in 0..4 {
                if j != i {
                    num *= u - j as f64;
                    den *= i as f64 - j as f64;
                }
            }
            w[i] = num / den;
            let mut dsum = 0.0;
            for k in 0..4 {
                if k == i {
                    continue;
                }
                let mut prod = 1.0;
                for j in 0..4 {
                    if j != i && j != k {
                        prod *= u - j as f64;
                    }
                }
                dsum += prod;
            }
            dw[i] = dsum / den / h;
        }
        (base, w, dw)
    }

    /// Cubic interpolation; zero outside the support.
    pub fn value_at(&self, x: f64) -> CMatrix {
        let m = self.dim();
        if x < self.a || x > self.b {
            return CMatrix::zeros(m, m);
        }
        let (base, w, _) = self.stencil(x);
        let mut out = CMatrix::zeros(m, m);
        for i in 0..4 {
            out += &self.values[base + i] * c(w[i], 0.0);
        }
        out
    }

    pub fn derivative_at(&self, x: f64) -> CMatrix {
        let m = self.dim();
        let (base, _, dw) = self.stencil(x.clamp(self.a, self.b));
        let mut out = CMatrix::zeros(m, m);
        for i in 0..4 {
            out += &self.values[base + i] * c(dw[i], 0.0);
        }
        out
    }

    /// Composite Newton–Cotes weights for the grid (Simpson, with a 3/8 panel
    /// at the end when the interval count is odd).
    pub fn weights(&self) -> Vec<f64> {
        composite_weights(self.values.len(), self.spacing())
    }

    /// `int_a^b f(x) dx` on the grid.
    pub fn integral(&self) -> CMatrix {
        let m = self.dim();
        let mut out = CMatrix::zeros(m, m);
        for (v, w) in self.values.iter().zip(self.weights()) {
            out += v * c(w, 0.0);
        }
        out
    }

    /// `int_a^b f(mu) / (mu - x) dmu` for `x` outside `[a, b]`.
    pub fn cauchy_outside(&self, x: f64) -> CMatrix {
        let m = self.dim();
        let mut out = CMatrix::zeros(m, m);
        for (j, (v, w)) in self.values.iter().zip(self.weights()).enumerate() {
            let d = self.node(j) - x;
            // touching an endpoint: the density vanishes there
            if d.abs() > 1e-14 * (1.0 + x.abs()) {
                out += v * c(w / d, 0.0);
            }
        }
        out
    }

    /// Principal value anywhere in `[a, b]`, including the endpoints, where
    /// the density must vanish.
    pub fn cauchy_on_support(&self, lambda: f64) -> Result<CMatrix> {
        if !(lambda >= self.a && lambda <= self.b) {
            return Err(Error::OutOfSupport { lambda });
        }
        let f_lambda = self.value_at(lambda);
        let h = self.spacing();
        let interior = lambda - self.a > 1e-9 * h && self.b - lambda > 1e-9 * h;
        let scale = self.values.iter().map(crate::linalg::norm).fold(0.0, f64::max);
        if !interior && crate::linalg::norm(&f_lambda) > 1e-10 * scale.max(1.0) {
            return Err(Error::OutOfSupport { lambda });
        }
        let m = self.dim();
        let mut acc = CMatrix::zeros(m, m);
        for (j, w) in self.weights().into_iter().enumerate() {
            let d = self.node(j) - lambda;
            let g = if d.abs() < 1e-6 * h {
                self.derivative_at(lambda)
            } else {
                (&self.values[j] - &f_lambda) * c(1.0 / d, 0.0)
            };
            acc += g * c(w, 0.0);
        }
        if interior {
            acc += f_lambda * c(((self.b - lambda) / (lambda - self.a)).ln(), 0.0);
        }
        Ok(acc)
    }
}

pub(crate) fn composite_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = alloc::vec![0.0; n];
    let intervals = n - 1;
    let (simpson_end, tail) = if intervals % 2 == 0 { (intervals, false) } else { (intervals - 3, true) };
    let mut k = 0;
    while k < simpson_end {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
        k += 2;
    }
    if tail {
        let s = simpson_end;
        let f = 3.0 * h / 8.0;
        w[s] += f;
        w[s + 1] += 3.0 * f;
        w[s + 2] += 3.0 * f;
        w[s + 3] += f;
    }
    w
}

/// Principal value `P.V. int_a^b f(mu) / (mu - lambda) dmu` by singularity
/// subtraction: the regular part `(f(mu) - f(lambda)) / (mu - lambda)` goes
/// through the composite rule and `f(lambda) ln((b - lambda)/(lambda - a))`
/// is added in closed form.
pub fn pv_cauchy(density: &SampledDensity, lambda: f64) -> Result<CMatrix> {
    let n = density.len();
    if n < MIN_NODES {
        return Err(Error::GridTooCoarse { nodes: n, required: MIN_NODES });
    }
    let (a, b) = density.support();
    let h = density.spacing();
    if !(lambda > a + 2.0 * h * (1.0 - 1e-12) && lambda < b - 2.0 * h * (1.0 - 1e-12)) {
        return Err(Error::OutOfSupport { lambda });
    }
    density.cauchy_on_support(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledDensity {
        SampledDensity::from_fn(a, b, n, |x| CMatrix::from_element(1, 1, c(f(x), 0.0))).unwrap()
    }

    #[test]
    fn constant_density_at_midpoint_vanishes() {
        let d = scalar(-1.0, 1.0, 129, |_| 3.0);
        assert!(pv_cauchy(&d, 0.0).unwrap()[(0, 0)].norm() < 1e-13);
    }

    #[test]
    fn linear_density_gives_interval_length() {
        let d = scalar(-1.0, 1.0, 129, |x| x);
        assert!((pv_cauchy(&d, 0.0).unwrap()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-12);
        // off-node evaluation: P.V. int mu/(mu-l) = 2 + l ln((1-l)/(1+l))
        let l = 0.123_456;
        let exact = 2.0 + l * ((1.0 - l) / (1.0 + l)).ln();
        assert!((pv_cauchy(&d, l).unwrap()[(0, 0)].re - exact).abs() < 1e-12);
    }

    #[test]
    fn rejects_coarse_grid_and_points_outside() {
        let d = scalar(-1.0, 1.0, 32, |x| x);
        assert!(matches!(pv_cauchy(&d, 0.0), Err(Error::GridTooCoarse { .. })));
        let d = scalar(-1.0, 1.0, 129, |x| x);
        assert!(matches!(pv_cauchy(&d, 1.5), Err(Error::OutOfSupport { .. })));
        assert!(matches!(pv_cauchy(&d, -0.999), Err(Error::OutOfSupport { .. })));
    }

    #[test]
    fn weights_integrate_cubics_exactly() {
        for n in [65usize, 66] {
            let w = composite_weights(n, 2.0 / (n - 1) as f64);
            let s: f64 = w.iter().enumerate().map(|(j, w)| {
                let x = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                w * (x * x * x + x * x)
            }).sum();
            assert!((s - 2.0 / 3.0).abs() < 1e-13, "n = {n}: {s}");
        }
    }
}
