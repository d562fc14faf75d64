//! Discrete Fourier helpers for uniformly sampled periodic functions.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized forward transform: `c_k = (1/M) sum_j f_j exp(-2 pi i j k / M)`.
pub fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    if m == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Inverse of [`forward`]: `f_j = sum_k c_k exp(2 pi i j k / M)`.
pub fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len();
    let mut buf = coeffs.to_vec();
    if m == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

pub fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let z: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&z)
}

/// Signed wavenumber of DFT slot `j` in a length-`m` transform; the Nyquist slot maps to `m/2`.
#[inline]
pub fn wavenumber(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// DFT slot holding wavenumber `k`.
#[inline]
pub fn slot(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// `order`-th derivative of a real `period`-periodic function sampled at `M` uniform points.
/// The Nyquist mode is discarded.
pub fn derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let m = samples.len();
    let mut c = forward_real(samples);
    let base = 2.0 * std::f64::consts::PI / period;
    for (j, z) in c.iter_mut().enumerate() {
        let k = wavenumber(j, m);
        if m.is_multiple_of(2) && j == m / 2 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, base * k as f64);
        *z *= ik.powu(order);
    }
    inverse(&c).into_iter().map(|z| z.re).collect()
}

/// Antiderivative vanishing at the first sample, for a periodic integrand:
/// `F(s_j) = mean * s_j + periodic part`.
pub fn antiderivative(samples: &[f64], period: f64) -> Vec<f64> {
    let m = samples.len();
    let mut c = forward_real(samples);
    let mean = c[0].re;
    c[0] = Complex64::new(0.0, 0.0);
    let base = 2.0 * std::f64::consts::PI / period;
    for (j, z) in c.iter_mut().enumerate().skip(1) {
        if m.is_multiple_of(2) && j == m / 2 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = wavenumber(j, m);
        *z /= Complex64::new(0.0, base * k as f64);
    }
    let periodic: Vec<f64> = inverse(&c).into_iter().map(|z| z.re).collect();
    let h = period / m as f64;
    (0..m)
        .map(|j| mean * h * j as f64 + periodic[j] - periodic[0])
        .collect()
}

/// Fraction of spectral energy carried by wavenumbers `|k| > m/4` (the upper half of the spectrum).
pub fn high_frequency_fraction(samples: &[f64]) -> f64 {
    let m = samples.len();
    let c = forward_real(samples);
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let high: f64 = c
        .iter()
        .enumerate()
        .filter(|(j, _)| wavenumber(*j, m).unsigned_abs() as usize > m / 4)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    high / total
}

/// Evaluates the trigonometric interpolant defined by normalized coefficients `c`
/// (length `m`, as returned by [`forward`]) at `x` in units where the period is `period`.
/// The Nyquist term is split symmetrically so that real data stay real.
pub fn interpolate(c: &[Complex64], period: f64, x: f64) -> Complex64 {
    let m = c.len();
    let base = 2.0 * std::f64::consts::PI / period;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, z) in c.iter().enumerate() {
        let k = wavenumber(j, m);
        if m.is_multiple_of(2) && j == m / 2 {
            acc += z * (base * k as f64 * x).cos();
        } else {
            acc += z * Complex64::from_polar(1.0, base * k as f64 * x);
        }
    }
    acc
}

/// `order`-th derivative of the trigonometric interpolant at `x`.
pub fn interpolate_derivative(c: &[Complex64], period: f64, x: f64, order: u32) -> Complex64 {
    let m = c.len();
    let base = 2.0 * std::f64::consts::PI / period;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, z) in c.iter().enumerate() {
        if m.is_multiple_of(2) && j == m / 2 {
            continue;
        }
        let k = base * wavenumber(j, m) as f64;
        acc += z * Complex64::new(0.0, k).powu(order) * Complex64::from_polar(1.0, k * x);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_trig_polynomial() {
        let m = 64;
        let l = 3.0;
        let f: Vec<f64> = (0..m)
            .map(|j| {
                let s = l * j as f64 / m as f64;
                (2.0 * PI * s / l).sin() + 0.5 * (6.0 * PI * s / l).cos()
            })
            .collect();
        let d1 = derivative(&f, l, 1);
        let d2 = derivative(&f, l, 2);
        for j in 0..m {
            let s = l * j as f64 / m as f64;
            let w = 2.0 * PI / l;
            let e1 = w * (w * s).cos() - 1.5 * w * (3.0 * w * s).sin();
            let e2 = -w * w * (w * s).sin() - 4.5 * w * w * (3.0 * w * s).cos();
            assert!((d1[j] - e1).abs() < 1e-12);
            assert!((d2[j] - e2).abs() < 1e-11);
        }
    }

    #[test]
    fn antiderivative_with_mean() {
        let m = 32;
        let l = 2.0 * PI;
        let f: Vec<f64> = (0..m).map(|j| 1.5 + (j as f64 * l / m as f64).cos()).collect();
        let big_f = antiderivative(&f, l);
        for (j, v) in big_f.iter().enumerate() {
            let s = j as f64 * l / m as f64;
            assert!((v - (1.5 * s + s.sin())).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolant_reproduces_samples_and_midpoints() {
        let m = 16;
        let l = 1.0;
        let g = |s: f64| (2.0 * PI * s).sin() * 0.3 + (4.0 * PI * s).cos();
        let f: Vec<f64> = (0..m).map(|j| g(j as f64 / m as f64)).collect();
        let c = forward_real(&f);
        for x in [0.0, 0.1, 0.37, 0.9] {
            assert!((interpolate(&c, l, x).re - g(x)).abs() < 1e-13);
        }
        let d = interpolate_derivative(&c, l, 0.37, 1).re;
        let want = 0.6 * PI * (2.0 * PI * 0.37).cos() - 4.0 * PI * (4.0 * PI * 0.37).sin();
        assert!((d - want).abs() < 1e-12);
    }

    #[test]
    fn high_frequency_fraction_detects_noise() {
        let m = 64;
        let smooth: Vec<f64> = (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).sin()).collect();
        assert!(high_frequency_fraction(&smooth) < 1e-20);
        let rough: Vec<f64> = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(high_frequency_fraction(&rough) > 0.9);
    }
}
