//! Comparisons against independent references. `[DERIVED]` values come from
//! closed forms or separate numerics written for the test; `[PAPER]` values
//! are constants stated for the free and constant-potential models.

mod common;

use std::f64::consts::PI;

use common::*;
use xikit_core::branchlog::{log_dissipative, log_dissipative_with, pv_cauchy, LogStrategy, SampledDensity};
use xikit_core::continuum::ContinuumModel;
use xikit_core::finite_pair::build_pair;
use xikit_core::linalg::{c, det, identity, trace, CMatrix, C64};
use xikit_core::schrodinger::SchrodingerModel;
use xikit_core::HermitianOperator;

fn bump_model(nodes: usize) -> ContinuumModel {
    ContinuumModel::from_fn(-1.0, 1.0, nodes, |x| CMatrix::from_element(1, 1, c(bump(x), 0.0))).unwrap()
}

// [DERIVED] xi against eigenvalue counts from an LDL* inertia computation.
#[test]
fn xi_matches_inertia_counting() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let n = 3 + (seed as usize % 6);
        let rank = 1 + (seed as usize % 3).min(n - 1);
        let h0 = hermitian(&mut r, n, 2.0);
        let k = matrix(&mut r, n, rank);
        let pair = build_pair(h0.clone(), k, signature(rank, rank.div_ceil(2))).unwrap();
        let (lo, hi) = pair.spectral_hull();
        for i in 0..40 {
            let l = lo - 0.3 + (hi - lo + 0.6) * (i as f64 + 0.37) / 40.0;
            if !pair.is_regular(l) {
                continue;
            }
            let sample = pair.spectral_shift_operators(l).unwrap();
            let expected = counting_oracle(h0.matrix(), pair.h().matrix(), l) as f64;
            assert!((sample.xi - expected).abs() < 1e-9, "seed {seed}, lambda {l}: {} vs {expected}", sample.xi);
        }
    }
}

// [DERIVED] rank one, V = t v v*: Xi_+ is 1 exactly where
// 1 + t sum |<phi_k, v>|^2 / (e_k - lambda) is negative.
#[test]
fn rank_one_xi_plus_is_sign_of_scalar_phi() {
    let mut r = rng(77);
    let h0 = hermitian(&mut r, 6, 2.0);
    let v = matrix(&mut r, 6, 1);
    let t: f64 = 0.8;
    let pair = build_pair(h0.clone(), &v * c(t.sqrt(), 0.0), identity(1)).unwrap();
    let eig = h0.matrix().clone().symmetric_eigen();
    let weights: Vec<f64> = (0..6).map(|k| (eig.eigenvectors.column(k).adjoint() * &v)[(0, 0)].norm_sqr()).collect();
    let (lo, hi) = pair.spectral_hull();
    for i in 0..200 {
        let l = lo - 0.5 + (hi - lo + 1.0) * (i as f64 + 0.5) / 200.0;
        if !pair.is_regular(l) {
            continue;
        }
        let phi: f64 = 1.0 + t * (0..6).map(|k| weights[k] / (eig.eigenvalues[k] - l)).sum::<f64>();
        let xp = scalar(&pair.spectral_shift_operators(l).unwrap().xi_plus).re;
        assert!((xp - f64::from(u8::from(phi < 0.0))).abs() < 1e-10, "lambda {l}: phi {phi}, Xi+ {xp}");
    }
}

// [DERIVED] xi as the continuous argument of det(I + V (H0 - lambda - i eps)^-1) / pi,
// tracked from large eps down to eps = 1e-9.
#[test]
fn xi_matches_tracked_perturbation_determinant() {
    let mut r = rng(5);
    let h0 = hermitian(&mut r, 5, 2.0);
    let k = matrix(&mut r, 5, 2);
    let pair = build_pair(h0.clone(), k, signature(2, 1)).unwrap();
    let n = 5;
    let (lo, hi) = pair.spectral_hull();
    for i in 0..15 {
        let l = lo + (hi - lo) * (i as f64 + 0.41) / 15.0;
        if !pair.is_regular(l) {
            continue;
        }
        let d = |eps: f64| {
            let mut shifted = h0.matrix().clone();
            for j in 0..n {
                shifted[(j, j)] -= C64::new(l, eps);
            }
            det(&(identity(n) + pair.v() * shifted.try_inverse().unwrap()))
        };
        let mut eps: f64 = 1e4;
        let mut prev = d(eps);
        let mut arg = prev.arg();
        while eps > 1e-9 {
            eps *= 0.98;
            let cur = d(eps);
            arg += (cur / prev).arg();
            prev = cur;
        }
        let xi = pair.spectral_shift_operators(l).unwrap().xi;
        assert!((arg / PI - xi).abs() < 1e-6, "lambda {l}: tracked {} vs {xi}", arg / PI);
    }
}

// [DERIVED] H0 = 0, V = t on C^1: xi is the indicator of [0, t).
#[test]
fn scalar_shift_closed_forms() {
    let t: f64 = 1.7;
    let pair = build_pair(HermitianOperator::from_real_diagonal(&[0.0]), CMatrix::from_element(1, 1, c(t.sqrt(), 0.0)), identity(1)).unwrap();
    assert_eq!(pair.spectral_shift_operators(0.9).unwrap().xi, 1.0);
    assert_eq!(pair.spectral_shift_operators(-0.2).unwrap().xi, 0.0);
    assert_eq!(pair.spectral_shift_operators(2.0).unwrap().xi, 0.0);
    let rule = pair.sum_rule();
    assert!((rule.integral_xi - t).abs() < 1e-14);
    let z = c(0.3, 0.7);
    let chk = pair.krein_resolvent_residual(z).unwrap();
    let exact = (c(t, 0.0) - z).inv() - (-z).inv();
    assert!((chk.lhs - exact).norm() < 1e-14);
    assert!(chk.residual < 1e-13);
}

// [DERIVED] principal value of the bump against its closed form.
#[test]
fn pv_of_bump_matches_closed_form() {
    let d = SampledDensity::from_fn(-1.0, 1.0, 2049, |x| CMatrix::from_element(1, 1, c(bump(x), 0.0))).unwrap();
    for l in [-0.9, -0.5, -0.123, 0.0, 0.31, 0.77, 0.95] {
        let got = scalar(&pv_cauchy(&d, l).unwrap()).re;
        assert!((got - bump_pv(l)).abs() < 1e-8, "lambda {l}: {got} vs {}", bump_pv(l));
    }
}

// [DERIVED] rank-one continuum: Xi_+ = arg(1 + s T(lambda + i0)) / pi with
// T = PV + i pi f, and Xi_- = -arg(...) / pi for s < 0.
#[test]
fn rank_one_continuum_xi_closed_form() {
    let m = bump_model(2049);
    for s in [0.4, 1.5, 6.0, -0.3, -0.7] {
        for l in [-0.8, -0.3, 0.05, 0.5, 0.9] {
            let arg = (s * PI * bump(l)).atan2(1.0 + s * bump_pv(l)) / PI;
            let expected = if s > 0.0 { arg } else { -arg };
            let got = trace(&m.xsso_pm(l, s).unwrap()).re;
            assert!((got - expected).abs() < 1e-8, "s {s}, lambda {l}: {got} vs {expected}");
        }
    }
}

// [DERIVED] int Xi_+ over the line equals s int A = 16 s / 15 for the bump.
#[test]
fn continuum_carey_for_the_bump() {
    let m = bump_model(1025);
    for s in [0.5, 1.5, 4.0] {
        let carey = m.carey_reconstruction(s).unwrap();
        assert!((scalar(&carey.lhs).re - 16.0 * s / 15.0).abs() < 1e-9);
        assert!(carey.deviation < 1e-6, "s {s}: {}", carey.deviation);
    }
}

// [DERIVED] log of a normal dissipative matrix from its eigenvalues.
#[test]
fn log_of_normal_matrix() {
    let mut r = rng(12);
    for n in [1, 3, 6] {
        let q = matrix(&mut r, n, n).qr().q();
        let zs: Vec<C64> = (0..n).map(|k| C64::from_polar(0.5 + k as f64, 0.1 + 2.9 * k as f64 / n as f64)).collect();
        let t = &q * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(zs.clone())) * q.adjoint();
        let expected = &q * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(zs.iter().map(|z| z.ln()).collect())) * q.adjoint();
        for strategy in [LogStrategy::Auto, LogStrategy::ForceQuadrature] {
            let got = log_dissipative_with(&t, strategy).unwrap().value;
            let err = (&got - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "n {n}, {strategy:?}: {err}");
        }
    }
}

// [DERIVED] exp(log T) with an independent Taylor exponential.
#[test]
fn log_inverts_reference_exponential() {
    let mut r = rng(31);
    for n in 1..7 {
        let re = hermitian(&mut r, n, 3.0).matrix().clone();
        let b = matrix(&mut r, n, n);
        let t = re + &b * b.adjoint() * c(0.0, 1.0);
        let log = log_dissipative(&t).unwrap();
        let back = expm_reference(&log.value);
        let err = (&back - &t).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "n {n}: {err}");
    }
}

// [DERIVED] discrete Green's function against ODE shooting (RK4, step h/2).
#[test]
fn green_matches_shooting() {
    let (l, h) = (20.0, 0.02);
    for (v, y) in [(Box::new(|x: f64| x.cos()) as Box<dyn Fn(f64) -> f64 + Sync>, 0.4), (Box::new(|x: f64| -1.5 * (-x * x / 4.0).exp()), 0.0)] {
        let model = SchrodingerModel::new(&v, l, h, y).unwrap();
        let ops = model.discretize().unwrap();
        for z in [-5.0, -20.0, -50.0] {
            let g = ops.green_diagonal(c(z, 0.0)).unwrap();
            let oracle = shooting_green(&v, l, y, z, h / 2.0);
            let rel = (g.re - oracle).abs() / oracle;
            assert!(g.im.abs() < 1e-14);
            // second-order discretization error, about (h k)^2 / 12 with k^2 = 2|z|
            assert!(rel < 0.25 * h * h * 2.0 * z.abs(), "z {z}: {} vs {oracle}, rel {rel}", g.re);
        }
    }
}

// [PAPER] free Green's diagonal i 2^{-1/2} z^{-1/2} within 1% on [-100, -10].
#[test]
fn free_green_constant() {
    let ops = SchrodingerModel::free(20.0, 0.02, 0.0).unwrap().discretize().unwrap();
    for k in 0..=10 {
        let z = -10.0 * 10f64.powf(k as f64 / 10.0);
        let g = ops.green_diagonal(c(z, 0.0)).unwrap();
        let exact = C64::new(0.0, 1.0) / (2f64.sqrt() * C64::new(z, 0.0).sqrt());
        assert!((g - exact).norm() / exact.norm() < 1e-2, "z {z}");
    }
}

// [PAPER] the free xi averages to 1/2 over the lower quarter of the spectrum.
#[test]
fn free_xi_averages_one_half() {
    let ops = SchrodingerModel::free(20.0, 0.02, 0.0).unwrap().discretize().unwrap();
    let quarter = ops.lambda_cut() / 4.0;
    let avg = ops.xi_step().integral_over(0.0, quarter) / quarter;
    assert!((avg - 0.5).abs() < 0.05, "{avg}");
}

// [PAPER] potential recovery for a constant potential and the c / (2 z^2)
// leading term of the weighted xi difference.
#[test]
fn constant_potential_constants() {
    let model = SchrodingerModel::new(|_| 0.5, 20.0, 0.02, 0.0).unwrap();
    for (z, est) in model.recover_potential(&[-20.0, -50.0, -120.0, -240.0]).unwrap() {
        assert!((est - 0.5).abs() < 0.05, "z {z}: {est}");
    }
    let s = model.theorem411(-50.0).unwrap();
    assert!((s.lhs - 0.5 / 5000.0).abs() / (0.5 / 5000.0) < 0.15, "{}", s.lhs);
}

// [DERIVED] the Friedrichs m-function of the free model is i at z = i.
#[test]
fn m_function_normalization() {
    let ops = SchrodingerModel::free(20.0, 0.02, 0.0).unwrap().discretize().unwrap();
    let m = ops.m_functions(C64::new(0.0, 1.0)).unwrap();
    assert!((m.m_f - C64::new(0.0, 1.0)).norm() < 1e-12);
    assert!((m.m_pi2 - C64::new(0.0, 1.0)).norm() < 1e-12);
}
