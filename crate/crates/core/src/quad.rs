//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature for scalar and
//! matrix-valued integrands.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Add;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{norm, CMatrix, C64};

/// Values that can be accumulated by a quadrature rule.
pub trait Quadrand: Clone + Add<Output = Self> {
    fn magnitude(&self) -> f64;
    fn scaled(self, w: f64) -> Self;
}

impl Quadrand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn scaled(self, w: f64) -> Self {
        self * w
    }
}

impl Quadrand for C64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn scaled(self, w: f64) -> Self {
        self * w
    }
}

impl Quadrand for CMatrix {
    fn magnitude(&self) -> f64 {
        norm(self)
    }
    fn scaled(mut self, w: f64) -> Self {
        self.scale_mut(w);
        self
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    pub fn integrate<T: Quadrand, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc: Option<T> = None;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x).scaled(w * half);
            acc = Some(match acc {
                Some(s) => s + v,
                None => v,
            });
        }
        acc.expect("rule has nodes")
    }

    /// Physical nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 7/15-point Gauss–Kronrod panel: (Kronrod estimate, error estimate).
pub fn gauss_kronrod_15<T: Quadrand, F: FnMut(f64) -> T>(a: f64, b: f64, f: &mut F) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc.clone().scaled(WGK[7]);
    let mut gauss = fc.scaled(WG[3]);
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(mid - x);
        let f2 = f(mid + x);
        let s = f1 + f2;
        kron = kron + s.clone().scaled(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s.scaled(WG[j / 2]);
        }
    }
    let kron = kron.scaled(half);
    let gauss = gauss.scaled(half);
    let err = (kron.clone() + gauss.scaled(-1.0)).magnitude();
    (kron, err)
}

/// Locally adaptive Gauss–Kronrod: a panel is accepted once its error
/// estimate is below `tol` times its share of the interval (or below
/// roundoff relative to the running value).
pub fn adaptive<T: Quadrand, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<T> {
    if a == b {
        let (v, _) = gauss_kronrod_15(a, a, &mut f);
        return Ok(v);
    }
    let width = b - a;
    let mut stack: Vec<(f64, f64)> = alloc::vec![(a, b)];
    let mut acc: Option<T> = None;
    let mut panels = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        panels += 1;
        if panels > max_panels {
            return Err(Error::QuadratureFailure { panels: max_panels });
        }
        let (v, err) = gauss_kronrod_15(lo, hi, &mut f);
        let share = tol * ((hi - lo) / width).abs();
        let floor = 64.0 * f64::EPSILON * v.magnitude();
        if err <= share.max(floor) || (hi - lo).abs() < 1e-14 * (1.0 + lo.abs()) {
            acc = Some(match acc {
                Some(s) => s + v,
                None => v,
            });
        } else {
            let m = 0.5 * (lo + hi);
            stack.push((m, hi));
            stack.push((lo, m));
        }
    }
    Ok(acc.expect("at least one panel"))
}

/// Adaptive integration over consecutive sub-intervals `[p_k, p_{k+1}]`.
pub fn adaptive_pieces<T: Quadrand, F: FnMut(f64) -> T>(
    mut f: F,
    points: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<Option<T>> {
    let mut acc: Option<T> = None;
    let total: f64 = points.windows(2).map(|w| w[1] - w[0]).sum::<f64>().max(f64::MIN_POSITIVE);
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let v = adaptive(&mut f, w[0], w[1], tol * (w[1] - w[0]) / total, max_panels)?;
        acc = Some(match acc {
            Some(s) => s + v,
            None => v,
        });
    }
    Ok(acc)
}
