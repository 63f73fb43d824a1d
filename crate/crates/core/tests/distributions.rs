//! Kolmogorov-Smirnov checks of the samplers at the 1% level.

use igplab::sampling::real_pure_state;
use igplab::*;
use nalgebra::DMatrix;

const N: usize = 10_000;
/// Asymptotic KS coefficient at the 1% level.
const C_01: f64 = 1.628;

fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut worst) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    worst
}

fn critical_two(n: usize, m: usize) -> f64 {
    C_01 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

#[test]
fn real_pure_state_component_is_uniform_in_three_dimensions() {
    // A uniform point on S^2 has each coordinate uniform on [-1, 1].
    let mut r = RngStream::new(1, 0).rng();
    let xs: Vec<f64> = (0..N).map(|_| real_pure_state(3, &mut r).unwrap().amplitudes()[0].re).collect();
    assert!(ks_one_sample(xs, |x| (x + 1.0) / 2.0) < C_01 / (N as f64).sqrt());
}

#[test]
fn real_pure_state_matches_orthogonal_column() {
    let d = 5;
    let mut r = RngStream::new(2, 0).rng();
    let a: Vec<f64> = (0..N).map(|_| real_pure_state(d, &mut r).unwrap().amplitudes()[1].re).collect();
    let mut r = RngStream::new(2, 1).rng();
    let b: Vec<f64> = (0..N).map(|_| haar_orthogonal(d, &mut r).unwrap().to_real()[(1, 0)]).collect();
    assert!(ks_two_sample(a, b) < critical_two(N, N));
}

#[test]
fn haar_unitary_entry_modulus_is_beta() {
    // |U_00|^2 ~ Beta(1, d - 1), CDF 1 - (1 - x)^(d-1).
    for d in [2usize, 4, 8] {
        let mut r = RngStream::new(3, d as u64).rng();
        let xs: Vec<f64> = (0..N).map(|_| haar_unitary(d, &mut r).unwrap().as_inner()[(0, 0)].norm_sqr()).collect();
        let ks = ks_one_sample(xs, |x| 1.0 - (1.0 - x).powi(d as i32 - 1));
        assert!(ks < C_01 / (N as f64).sqrt(), "d={d} ks={ks}");
    }
}

#[test]
fn haar_unitary_phase_is_uniform() {
    // Without the phase correction the diagonal of Q is biased toward the positive real axis.
    let mut r = RngStream::new(4, 0).rng();
    let xs: Vec<f64> = (0..N).map(|_| haar_unitary(3, &mut r).unwrap().as_inner()[(0, 0)].arg()).collect();
    let ks = ks_one_sample(xs, |x| (x + std::f64::consts::PI) / std::f64::consts::TAU);
    assert!(ks < C_01 / (N as f64).sqrt(), "ks={ks}");
}

#[test]
fn haar_orthogonal_left_invariance() {
    let d = 4;
    let q = haar_orthogonal(d, &mut RngStream::new(5, 99).rng()).unwrap().to_real();
    let mut r = RngStream::new(5, 0).rng();
    let plain: Vec<DMatrix<f64>> = (0..N).map(|_| haar_orthogonal(d, &mut r).unwrap().to_real()).collect();
    let mut r = RngStream::new(5, 1).rng();
    let rotated: Vec<DMatrix<f64>> = (0..N).map(|_| &q * haar_orthogonal(d, &mut r).unwrap().to_real()).collect();
    for (i, j) in [(0, 0), (1, 2), (3, 3)] {
        let a = plain.iter().map(|o| o[(i, j)]).collect();
        let b = rotated.iter().map(|o| o[(i, j)]).collect();
        let ks = ks_two_sample(a, b);
        assert!(ks < critical_two(N, N), "entry ({i},{j}) ks={ks}");
    }
}

#[test]
fn ks_helpers_detect_a_shift() {
    let mut r = RngStream::new(6, 0).rng();
    let a: Vec<f64> = (0..N).map(|_| r.gaussian()).collect();
    let b: Vec<f64> = (0..N).map(|_| r.gaussian() + 0.1).collect();
    assert!(ks_two_sample(a.clone(), b) > critical_two(N, N));
    let phi = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
    assert!(ks_one_sample(a, phi) < C_01 / (N as f64).sqrt());
}

/// Abramowitz-Stegun 7.1.26, absolute error below 1.5e-7.
fn erf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
    let poly = t * (0.254_829_592 + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let y = 1.0 - poly * (-x * x).exp();
    if x >= 0.0 {
        y
    } else {
        -y
    }
}
