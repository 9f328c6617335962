//! Seeded model generators shared by the runners and the test suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xikit_core::continuum::ContinuumModel;
use xikit_core::finite_pair::{build_pair, PairModel};
use xikit_core::linalg::{c, CMatrix};
use xikit_core::{HermitianOperator, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex matrix with entries uniform in the unit square around 0.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> HermitianOperator {
    let a = random_matrix(rng, n, n);
    let h = (&a + a.adjoint()) * c(0.5 * scale, 0.0);
    HermitianOperator::new(h).expect("symmetrized matrix is Hermitian")
}

/// Diagonal signature with both signs present once `rank >= 2`.
pub fn random_signature<R: Rng>(rng: &mut R, rank: usize, indefinite: bool) -> CMatrix {
    let mut signs: Vec<f64> = (0..rank).map(|_| if indefinite && rng.gen_bool(0.5) { -1.0 } else { 1.0 }).collect();
    if indefinite && rank >= 2 {
        if signs.iter().all(|&s| s > 0.0) {
            signs[rank - 1] = -1.0;
        }
        if signs.iter().all(|&s| s < 0.0) {
            signs[0] = 1.0;
        }
    }
    CMatrix::from_fn(rank, rank, |i, j| if i == j { c(signs[i], 0.0) } else { c(0.0, 0.0) })
}

/// `H0` of size `n` and `V = K J K*` of rank `rank`.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize, rank: usize, indefinite: bool) -> Result<PairModel> {
    let h0 = random_hermitian(rng, n, 2.0);
    let k = random_matrix(rng, n, rank);
    let j = random_signature(rng, rank, indefinite);
    build_pair(h0, k, j)
}

/// `count` points spread over the spectral hull (with margin), avoiding
/// eigenvalues by at least `gap`.
pub fn regular_points(pair: &PairModel, count: usize, gap: f64) -> Vec<f64> {
    let (lo, hi) = pair.spectral_hull();
    let (a, b) = (lo - 0.5, hi + 0.5);
    let mut eigs: Vec<f64> = [pair.h0(), pair.h_plus(), pair.h()].iter().flat_map(|op| op.eigenvalues().to_vec()).collect();
    eigs.sort_by(f64::total_cmp);
    let near = |x: f64| {
        let k = eigs.partition_point(|&e| e < x);
        [k.wrapping_sub(1), k].iter().filter_map(|&i| eigs.get(i)).any(|e| (e - x).abs() < gap)
    };
    let mut out = Vec::with_capacity(count);
    let step = (b - a) / count as f64;
    for i in 0..count {
        let mut x = a + (i as f64 + 0.5) * step;
        let mut tries = 0;
        while near(x) && tries < 16 {
            x += step / 17.0;
            tries += 1;
        }
        if !near(x) {
            out.push(x);
        }
    }
    out
}

/// `(1 - u^2)^2` on `[-1, 1]`, zero outside.
pub fn bump(u: f64) -> f64 {
    let w = 1.0 - u * u;
    if w > 0.0 {
        w * w
    } else {
        0.0
    }
}

/// A smooth positive density of rank `m` on `[a, b]`:
/// `A(x) = bump(u) B(u) B(u)* / m` with `B(u) = C0 + u C1`.
pub fn random_density<R: Rng>(rng: &mut R, m: usize, nodes: usize, support: (f64, f64)) -> Result<ContinuumModel> {
    let c0 = random_matrix(rng, m, m) + CMatrix::identity(m, m) * c(1.5, 0.0);
    let c1 = random_matrix(rng, m, m) * c(0.5, 0.0);
    let (a, b) = support;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    ContinuumModel::from_fn(a, b, nodes, |x| {
        let u = ((x - mid) / half).clamp(-1.0, 1.0);
        let bm = &c0 + &c1 * c(u, 0.0);
        let a = &bm * bm.adjoint() * c(bump(u) / m as f64, 0.0);
        (&a + a.adjoint()) * c(0.5, 0.0)
    })
}

/// `A(x) = bump(u) I_m`.
pub fn bump_density(m: usize, nodes: usize, support: (f64, f64)) -> Result<ContinuumModel> {
    let (a, b) = support;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    ContinuumModel::from_fn(a, b, nodes, |x| CMatrix::identity(m, m) * c(bump(((x - mid) / half).clamp(-1.0, 1.0)), 0.0))
}

/// Potentials accepted by the Schrödinger scenarios.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// `amplitude cos(frequency x + phase) + offset`.
    Cos { amplitude: f64, frequency: f64, phase: f64, offset: f64 },
    /// Piecewise-linear through `(x, V)` samples, constant beyond the ends.
    Table(Vec<(f64, f64)>),
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => *v,
            Potential::Cos { amplitude, frequency, phase, offset } => amplitude * (frequency * x + phase).cos() + offset,
            Potential::Table(pts) => {
                let k = pts.partition_point(|p| p.0 <= x);
                if k == 0 {
                    return pts[0].1;
                }
                if k == pts.len() {
                    return pts[k - 1].1;
                }
                let (x0, v0) = pts[k - 1];
                let (x1, v1) = pts[k];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Sup norm over `[-l, l]`.
    pub fn sup_norm(&self, l: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => v.abs(),
            Potential::Cos { amplitude, offset, .. } => amplitude.abs() + offset.abs(),
            Potential::Table(pts) => pts.iter().filter(|p| p.0.abs() <= l).map(|p| p.1.abs()).fold(0.0, f64::max),
        }
    }
}
