//! One-dimensional Schrödinger operators `-(1/2) d^2/dx^2 + V` on `[-L, L]`
//! with Dirichlet ends, discretized by the three-point stencil, together
//! with the Dirichlet decoupling at a grid point `y`.
//!
//! `xi(lambda, y)` is the spectral shift function of the pair (decoupled,
//! full), which in the discrete model is the counting difference
//! `N_full - N_dec` and equals one exactly where `G(lambda, y, y) < 0`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};
use crate::step::StepFunction;

const POLE_MARGIN: f64 = 1e-8;
/// Lower edge of the trusted `|z|` window for the trace formula.
pub const WINDOW_LOW: f64 = 20.0;
/// The upper edge is `WINDOW_HIGH_FACTOR / h^2`, where the stencil error
/// `h^2 |z|` stays at the few-percent level.
pub const WINDOW_HIGH_FACTOR: f64 = 0.1;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Dimension("tridiagonal needs n diagonal and n-1 off-diagonal entries"));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::InvalidArgument("tridiagonal QL failed to converge"));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut cs, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = cs * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    cs = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * cs * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = cs * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Solves `(M - z) x = rhs` by the Thomas algorithm.
    pub fn solve_shifted(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        let mut cp = alloc::vec![c(0.0, 0.0); n];
        let mut dp = alloc::vec![c(0.0, 0.0); n];
        let mut piv = c(self.diag[0], 0.0) - z;
        for k in 0..n {
            if k > 0 {
                piv = c(self.diag[k], 0.0) - z - cp[k - 1] * self.off[k - 1];
            }
            if piv.norm() == 0.0 {
                return Err(Error::Singular { sigma_min: 0.0 });
            }
            if k + 1 < n {
                cp[k] = c(self.off[k], 0.0) / piv;
            }
            let prev = if k > 0 { dp[k - 1] * self.off[k - 1] } else { c(0.0, 0.0) };
            dp[k] = (rhs[k] - prev) / piv;
        }
        let mut x = dp;
        for k in (0..n - 1).rev() {
            let next = x[k + 1];
            x[k] -= cp[k] * next;
        }
        Ok(x)
    }

    /// `((M - z)^{-1})_{jj}` from the two one-sided continued fractions.
    pub fn resolvent_diagonal(&self, z: C64, j: usize) -> C64 {
        let n = self.dim();
        let mut left = c(0.0, 0.0);
        for k in 0..j {
            let mut piv = c(self.diag[k], 0.0) - z;
            if k > 0 {
                piv -= c(self.off[k - 1] * self.off[k - 1], 0.0) / left;
            }
            left = piv;
        }
        let mut right = c(0.0, 0.0);
        for k in (j + 1..n).rev() {
            let mut piv = c(self.diag[k], 0.0) - z;
            if k + 1 < n {
                piv -= c(self.off[k] * self.off[k], 0.0) / right;
            }
            right = piv;
        }
        let mut denom = c(self.diag[j], 0.0) - z;
        if j > 0 {
            denom -= c(self.off[j - 1] * self.off[j - 1], 0.0) / left;
        }
        if j + 1 < n {
            denom -= c(self.off[j] * self.off[j], 0.0) / right;
        }
        denom.inv()
    }
}

/// Uniform grid `x_k = -L + (k + 1) h`, `k = 0..n`, excluding the Dirichlet ends.
#[derive(Debug, Clone)]
pub struct SchrodingerModel {
    half_length: f64,
    h: f64,
    y: f64,
    y_index: usize,
    potential: Vec<f64>,
}

impl SchrodingerModel {
    pub fn new<F: Fn(f64) -> f64>(potential: F, half_length: f64, h: f64, y: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.1) {
            return Err(Error::InvalidArgument("grid spacing must lie in (0, 0.1]"));
        }
        if !(half_length >= 10.0) {
            return Err(Error::InvalidArgument("truncation length must be at least 10"));
        }
        let cells = 2.0 * half_length / h;
        if (cells - cells.round()).abs() > 1e-9 * cells {
            return Err(Error::InvalidArgument("2L must be a multiple of h"));
        }
        let n = cells.round() as usize - 1;
        let pos = (y + half_length) / h - 1.0;
        if (pos - pos.round()).abs() > 1e-6 || pos.round() < 1.0 || pos.round() as usize + 2 > n {
            return Err(Error::InvalidArgument("decoupling point must be an interior grid node"));
        }
        let y_index = pos.round() as usize;
        let potential: Vec<f64> = (0..n).map(|k| potential(-half_length + (k + 1) as f64 * h)).collect();
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("potential must be finite on the grid"));
        }
        Ok(Self { half_length, h, y, y_index, potential })
    }

    pub fn free(half_length: f64, h: f64, y: f64) -> Result<Self> {
        Self::new(|_| 0.0, half_length, h, y)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn y_index(&self) -> usize {
        self.y_index
    }

    pub fn nodes(&self) -> usize {
        self.potential.len()
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_length + (k + 1) as f64 * self.h
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// The same grid and decoupling point with `V = 0`.
    pub fn free_counterpart(&self) -> Self {
        Self { potential: alloc::vec![0.0; self.nodes()], ..self.clone() }
    }

    /// `|z|` range on which the trace formula is trusted.
    pub fn validity_window(&self) -> (f64, f64) {
        (WINDOW_LOW, WINDOW_HIGH_FACTOR / (self.h * self.h))
    }

    pub fn discretize(&self) -> Result<DiscretizedOperators> {
        let n = self.nodes();
        let h2 = self.h * self.h;
        let diag: Vec<f64> = self.potential.iter().map(|v| 1.0 / h2 + v).collect();
        let off = alloc::vec![-0.5 / h2; n - 1];
        let full = Tridiagonal::new(diag.clone(), off.clone())?;
        let j = self.y_index;
        let mut dec_off = off.clone();
        dec_off[j - 1] = 0.0;
        dec_off[j] = 0.0;
        // the isolated node at y is dropped from the decoupled spectrum below
        let decoupled = Tridiagonal::new(diag.clone(), dec_off)?;
        let full_eigs = full.eigenvalues()?;
        let mut d_del = diag;
        d_del.remove(j);
        let mut o_del = off;
        o_del.remove(j);
        o_del[j - 1] = 0.0;
        let dec_eigs = Tridiagonal::new(d_del, o_del)?.eigenvalues()?;
        let e0 = full_eigs[0];
        Ok(DiscretizedOperators { h: self.h, y_index: j, full, decoupled, full_eigs, dec_eigs, e0 })
    }
}

/// `H_full` and the decoupled `H_dec` with their spectra. `H_dec` is kept
/// at full size with node `y` cut loose (for solves); its spectrum lists
/// only the `n - 1` eigenvalues of the two half chains.
#[derive(Debug, Clone)]
pub struct DiscretizedOperators {
    h: f64,
    y_index: usize,
    full: Tridiagonal,
    decoupled: Tridiagonal,
    full_eigs: Vec<f64>,
    dec_eigs: Vec<f64>,
    e0: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MFunctions {
    pub m_pi2: C64,
    pub m_f: C64,
    /// `m_F + tan(alpha_F) = -|G(i)|^2 / (G(z) Im G(i))`.
    pub m_f_shifted: C64,
}

#[derive(Debug, Clone, Copy)]
pub struct Theorem411Sample {
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| z^2`.
    pub residual: f64,
}

impl DiscretizedOperators {
    pub fn full(&self) -> &Tridiagonal {
        &self.full
    }

    pub fn full_eigenvalues(&self) -> &[f64] {
        &self.full_eigs
    }

    pub fn decoupled_eigenvalues(&self) -> &[f64] {
        &self.dec_eigs
    }

    /// `inf spec(H_full)`.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Top of the discrete spectrum, the effective energy cutoff.
    pub fn lambda_cut(&self) -> f64 {
        *self.full_eigs.last().expect("non-empty")
    }

    fn pole_distance(&self, z: C64) -> f64 {
        let k = self.full_eigs.partition_point(|&e| e < z.re);
        let mut best = f64::INFINITY;
        for idx in [k.wrapping_sub(1), k] {
            if let Some(&e) = self.full_eigs.get(idx) {
                best = best.min((z - e).norm());
            }
        }
        best
    }

    /// `G(z, y, y)`.
    pub fn green_diagonal(&self, z: C64) -> Result<C64> {
        let d = self.pole_distance(z);
        if d <= POLE_MARGIN {
            return Err(Error::PoleProximity { distance: d });
        }
        Ok(self.full.resolvent_diagonal(z, self.y_index) / self.h)
    }

    /// The column `G(z, ., y)` on the grid.
    pub fn green_column(&self, z: C64) -> Result<Vec<C64>> {
        let d = self.pole_distance(z);
        if d <= POLE_MARGIN {
            return Err(Error::PoleProximity { distance: d });
        }
        let mut rhs = alloc::vec![c(0.0, 0.0); self.full.dim()];
        rhs[self.y_index] = c(1.0 / self.h, 0.0);
        self.full.solve_shifted(z, &rhs)
    }

    /// `(H_dec - z)^{-1} u` with the `y` component pinned to zero.
    pub fn decoupled_solve(&self, z: C64, u: &[C64]) -> Result<Vec<C64>> {
        let mut rhs = u.to_vec();
        rhs[self.y_index] = c(0.0, 0.0);
        let mut x = self.decoupled.solve_shifted(z, &rhs)?;
        x[self.y_index] = c(0.0, 0.0);
        Ok(x)
    }

    /// `xi(., y) = N_full - N_dec` as a step function.
    pub fn xi_step(&self) -> StepFunction {
        StepFunction::counting_difference(&self.full_eigs, &self.dec_eigs)
    }

    /// `xi` at each grid point from the sign of `G(lambda, y, y)`.
    pub fn xi_from_green(&self, lambdas: &[f64]) -> Result<Vec<i64>> {
        lambdas
            .iter()
            .map(|&l| {
                let near = self
                    .dec_eigs
                    .iter()
                    .map(|e| (e - l).abs())
                    .fold(self.pole_distance(c(l, 0.0)), f64::min);
                if near <= POLE_MARGIN {
                    return Err(Error::PoleProximity { distance: near });
                }
                let g = self.full.resolvent_diagonal(c(l, 0.0), self.y_index);
                Ok(i64::from(g.re < 0.0))
            })
            .collect()
    }

    /// `E0 + int_{E0}^{cut} z^2 (lambda - z)^{-2} (1 - 2 xi) d lambda`.
    pub fn potential_estimate(&self, z: f64) -> f64 {
        let big_f = |l: f64| -z * z / (l - z);
        let (lo, hi) = (self.e0, self.lambda_cut());
        let xi_part: f64 = self.xi_step().integrate_antiderivative(lo, hi, big_f);
        self.e0 + (big_f(hi) - big_f(lo)) - 2.0 * xi_part
    }

    pub fn m_functions(&self, z: C64) -> Result<MFunctions> {
        let g = self.green_diagonal(z)?;
        let gi = self.green_diagonal(I)?;
        if g.norm() < 1e-12 {
            return Err(Error::ZeroGreen);
        }
        let m_pi2 = (g - gi.re) / gi.im;
        let m_f_shifted = -g.inv() * gi.norm_sqr() / gi.im;
        let m_f = m_f_shifted + gi.re / gi.im;
        Ok(MFunctions { m_pi2, m_f, m_f_shifted })
    }
}

impl SchrodingerModel {
    /// `(z, estimate of V(y))` for every `z` of the list inside the validity window.
    pub fn recover_potential(&self, z_list: &[f64]) -> Result<Vec<(f64, f64)>> {
        let (lo, hi) = self.validity_window();
        let inside: Vec<f64> = z_list.iter().copied().filter(|z| *z < 0.0 && -z >= lo && -z <= hi).collect();
        if inside.is_empty() {
            return Err(Error::WindowEmpty);
        }
        let ops = self.discretize()?;
        Ok(inside.into_iter().map(|z| (z, ops.potential_estimate(z))).collect())
    }

    /// Average of `V` against the free decay profile `exp(-2 sqrt(2|z|) |x - y|)`.
    pub fn local_average(&self, z: f64) -> f64 {
        let k = 2.0 * (2.0 * z.abs()).sqrt();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, v) in self.potential.iter().enumerate() {
            let w = (-k * (self.x(i) - self.y).abs()).exp();
            num += w * v;
            den += w;
        }
        num / den
    }

    /// Compares `int (lambda - z)^{-2} (eta - eta0)` with
    /// `-d/dz [v(z) / (m0(z) + cot(beta0 - alpha0_F))] = -d/dz [<V>_z / (2z)]`.
    pub fn theorem411(&self, z: f64) -> Result<Theorem411Sample> {
        if !(z <= -WINDOW_LOW) {
            return Err(Error::WindowEmpty);
        }
        let ops = self.discretize()?;
        let free = self.free_counterpart().discretize()?;
        let diff = ops.xi_step().combine(1, &free.xi_step(), -1);
        let lo = ops.e0.min(free.e0) - 1.0;
        let hi = ops.lambda_cut().max(free.lambda_cut()) + 1.0;
        // eta - eta0 = -(xi - xi0)
        let lhs = -diff.integrate_antiderivative(lo, hi, |l| -1.0 / (l - z));
        let q = |zz: f64| self.local_average(zz) / (2.0 * zz);
        let dz = 1e-3 * z.abs();
        let rhs = -(q(z + dz) - q(z - dz)) / (2.0 * dz);
        Ok(Theorem411Sample { z, lhs, rhs, residual: (lhs - rhs).abs() * z * z })
    }

    /// Relative distance of `G(z, ., y)` from the span of
    /// `(I - (H_dec - z)^{-1} V) G0(z, ., y)`.
    pub fn deficiency_link_residual(&self, z: f64) -> Result<f64> {
        let ops = self.discretize()?;
        if z >= ops.e0.min(0.0) {
            return Err(Error::InvalidArgument("z must lie below both spectra"));
        }
        let free = self.free_counterpart().discretize()?;
        let zc = c(z, 0.0);
        let a = ops.green_column(zc)?;
        let g0 = free.green_column(zc)?;
        let vg: Vec<C64> = g0.iter().zip(&self.potential).map(|(g, v)| g * *v).collect();
        let r = ops.decoupled_solve(zc, &vg)?;
        let b: Vec<C64> = g0.iter().zip(&r).map(|(g, r)| g - r).collect();
        Ok(projection_residual(&a, &b))
    }

    /// `M(z) - c^2 m0(z) + c^2 v(z)`, which tends to a constant as `z -> -inf`.
    /// `c^2` matches the leading `|z|^{1/2}` growth of the two
    /// Friedrichs m-functions; `v(z) = (u0(z), V u0(z))` with `u0` the free
    /// Green's column normalized at `z = i`.
    pub fn lemma410_combination(&self, z: f64) -> Result<C64> {
        let ops = self.discretize()?;
        let free = self.free_counterpart().discretize()?;
        let zc = c(z, 0.0);
        let big_m = ops.m_functions(zc)?.m_f;
        let m0 = free.m_functions(zc)?.m_f;
        let gi = ops.green_diagonal(I)?;
        let g0i = free.green_diagonal(I)?;
        let c2 = (gi.norm_sqr() / gi.im) / (g0i.norm_sqr() / g0i.im);
        let col_i = free.green_column(I)?;
        let norm_i2: f64 = col_i.iter().map(|u| u.norm_sqr()).sum::<f64>() * self.h;
        let u0 = free.green_column(zc)?;
        let v: C64 = u0.iter().zip(&self.potential).map(|(u, p)| u * u * *p).sum::<C64>() * (self.h / norm_i2);
        Ok(big_m - m0 * c2 + v * c2)
    }
}

fn projection_residual(a: &[C64], b: &[C64]) -> f64 {
    let bb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    let aa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    if bb == 0.0 {
        return if aa == 0.0 { 0.0 } else { 1.0 };
    }
    let ba: C64 = b.iter().zip(a).map(|(b, a)| b.conj() * a).sum();
    let coef = ba / bb;
    let res: f64 = a.iter().zip(b).map(|(a, b)| (a - b * coef).norm_sqr()).sum();
    (res / aa).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ql_matches_closed_form_laplacian() {
        let n = 50;
        let t = Tridiagonal::new(alloc::vec![2.0; n], alloc::vec![-1.0; n - 1]).unwrap();
        let eigs = t.eigenvalues().unwrap();
        for (k, e) in eigs.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn thomas_and_continued_fraction_agree() {
        let t = Tridiagonal::new(alloc::vec![3.0, 1.0, -2.0, 0.5, 4.0], alloc::vec![0.7, -1.1, 0.3, 2.0]).unwrap();
        let z = c(0.3, 0.8);
        for j in 0..5 {
            let mut rhs = alloc::vec![c(0.0, 0.0); 5];
            rhs[j] = c(1.0, 0.0);
            let x = t.solve_shifted(z, &rhs).unwrap();
            assert!((x[j] - t.resolvent_diagonal(z, j)).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_off_grid_decoupling_point() {
        assert!(SchrodingerModel::new(|_| 0.0, 10.0, 0.1, 0.05).is_err());
        assert!(SchrodingerModel::new(|_| 0.0, 10.0, 0.1, 0.3).is_ok());
    }

    #[test]
    fn free_model_green_and_estimate() {
        let model = SchrodingerModel::free(10.0, 0.02, 0.0).unwrap();
        let ops = model.discretize().unwrap();
        let g = ops.green_diagonal(c(-25.0, 0.0)).unwrap();
        assert!((g.re - 1.0 / 50f64.sqrt()).abs() < 0.01 / 50f64.sqrt());
        let est = model.recover_potential(&[-30.0]).unwrap();
        assert!(est[0].1.abs() < 0.05);
    }
}
