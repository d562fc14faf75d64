#![allow(clippy::needless_range_loop)]

mod support;

use std::f64::consts::PI;

use floquet_tubes::bands::BrillouinGrid;
use floquet_tubes::curvegeom::{build_curve, CurveSpec};
use floquet_tubes::hill::{hill_bands, potential_coeffs};
use floquet_tubes::special::{bessel_i0, bessel_j, bessel_j_zero, bessel_k0};
use floquet_tubes::transverse::{disk_basis, interval_basis};
use support::{bessel_zeros, fd_hill_richardson, SineGraph};

#[test]
fn sine_length_matches_simpson() {
    for &(a, p) in &[(0.1, 2.0 * PI), (0.5, 2.0 * PI), (0.3, 3.0)] {
        let curve = build_curve(&CurveSpec::sine_graph(2, a, p), 512).unwrap();
        let reference = SineGraph::new(a, p);
        assert!(
            (curve.length() - reference.length()).abs() < 1e-11 * reference.length(),
            "{} vs {}",
            curve.length(),
            reference.length()
        );
    }
}

#[test]
fn crest_curvature_is_a_k_squared() {
    let (a, p) = (0.5, 2.0 * PI);
    let curve = build_curve(&CurveSpec::sine_graph(2, a, p), 512).unwrap();
    let reference = SineGraph::new(a, p);
    let crest = reference.arclength(p / 4.0);
    let k = 2.0 * PI / p;
    assert!((curve.curvature_at(crest).abs() - a * k * k).abs() < 1e-9);
}

#[test]
fn hill_mean_matches_quadrature() {
    let (a, p) = (0.5, 2.0 * PI);
    let curve = build_curve(&CurveSpec::sine_graph(2, a, p), 512).unwrap();
    let coeffs = potential_coeffs(&curve, 32).unwrap();
    let reference = SineGraph::new(a, p).mean_potential();
    assert!((coeffs.mean() + reference).abs() < 1e-11, "{} vs {reference}", coeffs.mean());
}

#[test]
fn hill_matches_finite_differences_small_amplitude() {
    let (a, p) = (0.3, 2.0 * PI);
    let curve = build_curve(&CurveSpec::sine_graph(2, a, p), 512).unwrap();
    let grid = BrillouinGrid::standard(curve.length()).unwrap();
    let table = hill_bands(&curve, &grid, 48, 3).unwrap();
    let reference = SineGraph::new(a, p);
    let l = reference.length();
    for &i in &[3usize, 11, 27, 36] {
        let theta = grid.thetas[i];
        let fd = fd_hill_richardson(|s| reference.hill_potential(s), l, 2048, theta, 3, -0.2);
        for n in 0..3 {
            let v = table.value(i, n).unwrap();
            assert!((v - fd[n]).abs() < 1e-5, "theta {theta} band {n}: {v} vs {}", fd[n]);
        }
    }
}

#[test]
fn bessel_functions_match_integral_representations() {
    for m in 0..4 {
        for &x in &[0.3, 1.7, 5.5, 12.0] {
            assert!((bessel_j(m, x) - support::bessel_j(m, x)).abs() < 1e-13);
        }
        let oracle = bessel_zeros(m, 3);
        for (k, z) in oracle.iter().enumerate() {
            assert!((bessel_j_zero(m, k + 1).unwrap() - z).abs() < 1e-12 * z);
        }
    }
    for &x in &[0.05, 0.7, 2.0, 9.0, 30.0] {
        // K0(x) = int_0^inf exp(-x cosh t) dt, I0(x) = (1/pi) int_0^pi exp(x cos t) dt
        let n = 4000;
        let h = 12.0 / n as f64;
        let k0: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (-x * (i as f64 * h).cosh()).exp()
            })
            .sum::<f64>()
            * h;
        let m = 400;
        let i0: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                w * (x * (PI * i as f64 / m as f64).cos()).exp()
            })
            .sum::<f64>()
            / m as f64;
        assert!((bessel_k0(x).unwrap() - k0).abs() < 1e-12 * k0.max(1e-300), "K0({x})");
        assert!((bessel_i0(x) - i0).abs() < 1e-12 * i0, "I0({x})");
    }
}

#[test]
fn transverse_eigenvalues_match_closed_forms() {
    let interval = interval_basis(5);
    for (j, e) in interval.eigenvalues().iter().enumerate() {
        let exact = ((j + 1) as f64 * PI / 2.0).powi(2);
        assert!((e - exact).abs() < 1e-13 * exact);
    }
    let disk = disk_basis(6).unwrap();
    let mut oracle: Vec<f64> = Vec::new();
    for m in 0..4 {
        for z in bessel_zeros(m, 2) {
            oracle.push(z * z);
            if m > 0 {
                oracle.push(z * z);
            }
        }
    }
    oracle.sort_by(f64::total_cmp);
    for (e, o) in disk.eigenvalues().iter().zip(&oracle) {
        assert!((e - o).abs() < 1e-11 * o, "{e} vs {o}");
    }
}
