//! Seeded generators and independent reference computations for the
//! integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xikit_core::linalg::{c, CMatrix, C64};
use xikit_core::HermitianOperator;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianOperator {
    let a = matrix(rng, n, n);
    HermitianOperator::new((&a + a.adjoint()) * c(0.5 * scale, 0.0)).unwrap()
}

/// `diag(+1, ..., -1, ...)` with `plus` positive entries.
pub fn signature(rank: usize, plus: usize) -> CMatrix {
    CMatrix::from_fn(rank, rank, |i, j| if i != j { c(0.0, 0.0) } else if i < plus { c(1.0, 0.0) } else { c(-1.0, 0.0) })
}

/// Number of eigenvalues of the Hermitian `a` below `lambda`, from the
/// inertia of an unpivoted `LDL*` factorization of `a - lambda`.
pub fn negative_inertia(a: &CMatrix, lambda: f64) -> usize {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= c(lambda, 0.0);
    }
    let mut count = 0;
    for k in 0..n {
        let d = m[(k, k)].re;
        if d < 0.0 {
            count += 1;
        }
        for i in k + 1..n {
            let l = m[(i, k)] / d;
            for j in k + 1..n {
                let u = m[(k, j)];
                m[(i, j)] -= l * u;
            }
        }
    }
    count
}

/// `N_a(lambda) - N_b(lambda)` by inertia.
pub fn counting_oracle(a: &CMatrix, b: &CMatrix, lambda: f64) -> i64 {
    negative_inertia(a, lambda) as i64 - negative_inertia(b, lambda) as i64
}

/// `(1 - x^2)^2` on `[-1, 1]`.
pub fn bump(x: f64) -> f64 {
    let w = 1.0 - x * x;
    if w > 0.0 {
        w * w
    } else {
        0.0
    }
}

/// `PV int_{-1}^{1} (1 - x^2)^2 / (x - lambda) dx` in closed form.
pub fn bump_pv(lambda: f64) -> f64 {
    let w = 1.0 - lambda * lambda;
    -lambda * (10.0 / 3.0 - 2.0 * lambda * lambda) + w * w * ((1.0 - lambda) / (1.0 + lambda)).ln()
}

/// Matrix exponential by scaling and squaring with a long Taylor series.
pub fn expm_reference(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = norm.max(1.0).log2().ceil() as i32 + 4;
    let scaled = a * c(0.5f64.powi(squarings), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `G(z, y, y)` for `-u''/2 + V u` on `[-L, L]`, by fourth-order Runge-Kutta
/// shooting from both ends with decaying data, step `h`.
pub fn shooting_green<V: Fn(f64) -> f64>(v: V, l: f64, y: f64, z: f64, h: f64) -> f64 {
    let rhs = |x: f64, s: [f64; 2]| [s[1], 2.0 * (v(x) - z) * s[0]];
    let integrate = |from: f64, to: f64, start: [f64; 2]| {
        let steps = ((to - from).abs() / h).round() as usize;
        let dx = (to - from) / steps as f64;
        let mut s = start;
        let mut x = from;
        for _ in 0..steps {
            let k1 = rhs(x, s);
            let k2 = rhs(x + dx / 2.0, [s[0] + dx / 2.0 * k1[0], s[1] + dx / 2.0 * k1[1]]);
            let k3 = rhs(x + dx / 2.0, [s[0] + dx / 2.0 * k2[0], s[1] + dx / 2.0 * k2[1]]);
            let k4 = rhs(x + dx, [s[0] + dx * k3[0], s[1] + dx * k3[1]]);
            s = [s[0] + dx / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), s[1] + dx / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])];
            x += dx;
        }
        s
    };
    let kl = (2.0 * (v(-l) - z)).sqrt();
    let kr = (2.0 * (v(l) - z)).sqrt();
    let left = integrate(-l, y, [1.0, kl]);
    let right = integrate(l, y, [1.0, -kr]);
    2.0 * left[0] * right[0] / (left[1] * right[0] - left[0] * right[1])
}

pub fn scalar(z: &CMatrix) -> C64 {
    assert_eq!(z.nrows(), 1);
    z[(0, 0)]
}
