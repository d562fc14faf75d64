//! Comparison operator `S(theta) = (-i d/ds + theta)^2 - gamma^2/4` on `[0, L)` with
//! periodic boundary conditions, solved in the Fourier basis `exp(2 pi i n s / L)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bands::{BandKind, BandMetadata, BandStructure, BrillouinGrid};
use crate::curvegeom::PeriodicCurve;
use crate::eigen::HermitianMatrix;
use crate::error::{Error, Result};
use crate::fourier;

pub const DEFAULT_TRUNCATION: usize = 64;
pub const CERTIFICATION_TOLERANCE: f64 = 1e-9;
pub const ALIASING_LIMIT: f64 = 1e-10;

/// Fourier coefficients `c_k`, `|k| <= 2N`, of an `L`-periodic potential.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCoeffs {
    length: f64,
    truncation: usize,
    coeffs: Vec<Complex64>,
}

impl PotentialCoeffs {
    /// Coefficients from uniform samples on `[0, L)`; requires more than `4N` samples.
    pub fn from_samples(length: f64, samples: &[f64], truncation: usize) -> Result<Self> {
        let m = samples.len();
        if m <= 4 * truncation {
            return Err(Error::InvalidArgument(format!(
                "{m} samples cannot resolve |k| <= {}; increase M",
                2 * truncation
            )));
        }
        let hat = fourier::forward_real(samples);
        let n2 = 2 * truncation as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (2 * n2 + 1) as usize];
        for k in 0..=n2 {
            let plus = hat[fourier::slot(k, m)];
            let minus = hat[fourier::slot(-k, m)];
            let c = 0.5 * (plus + minus.conj());
            coeffs[(n2 + k) as usize] = c;
            coeffs[(n2 - k) as usize] = c.conj();
        }
        let out = Self {
            length,
            truncation,
            coeffs,
        };
        let fraction = out.tail_fraction(&hat);
        if fraction >= ALIASING_LIMIT {
            return Err(Error::Aliasing {
                fraction,
                limit: ALIASING_LIMIT,
            });
        }
        Ok(out)
    }

    fn tail_fraction(&self, hat: &[Complex64]) -> f64 {
        let m = hat.len();
        let total: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let n = self.truncation as i64;
        let tail: f64 = (n + 1..=2 * n)
            .map(|k| hat[fourier::slot(k, m)].norm_sqr() + hat[fourier::slot(-k, m)].norm_sqr())
            .sum();
        tail / total
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `c_k`; zero outside `|k| <= 2N`.
    pub fn get(&self, k: i64) -> Complex64 {
        let n2 = 2 * self.truncation as i64;
        if k.abs() > n2 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n2 + k) as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        self.get(0).re
    }
}

/// Coefficients of `gamma^2 / 4`; the curve is rebuilt on a finer grid if needed.
pub fn potential_coeffs(curve: &PeriodicCurve, truncation: usize) -> Result<PotentialCoeffs> {
    let curve = resolved(curve, truncation)?;
    let samples: Vec<f64> = curve.curvature().iter().map(|g| 0.25 * g * g).collect();
    PotentialCoeffs::from_samples(curve.length(), &samples, truncation)
}

fn resolved(curve: &PeriodicCurve, truncation: usize) -> Result<std::borrow::Cow<'_, PeriodicCurve>> {
    if curve.grid_len() > 4 * truncation {
        Ok(std::borrow::Cow::Borrowed(curve))
    } else {
        let m = (4 * truncation + 1).next_power_of_two().max(64);
        Ok(std::borrow::Cow::Owned(curve.rebuild(m)?))
    }
}

/// `(2N+1)`-dimensional matrix with entries `(2 pi n / L + theta)^2 delta_nm - c_{n-m}`.
pub fn hill_matrix(coeffs: &PotentialCoeffs, theta: f64, truncation: usize) -> HermitianMatrix {
    let n = truncation as i64;
    let l = coeffs.length();
    HermitianMatrix::from_lower(2 * truncation + 1, |i, j| {
        let (ni, nj) = (i as i64 - n, j as i64 - n);
        let mut z = -coeffs.get(ni - nj);
        if i == j {
            let q = 2.0 * PI * ni as f64 / l + theta;
            z += q * q;
        }
        z
    })
}

/// Lowest `count` eigenvalues of the truncated Hill matrix.
pub fn hill_eigenvalues(
    coeffs: &PotentialCoeffs,
    theta: f64,
    truncation: usize,
    count: usize,
) -> Result<Vec<f64>> {
    let mut ev = hill_matrix(coeffs, theta, truncation).eigenvalues()?;
    ev.truncate(count);
    Ok(ev)
}

/// Band functions on `grid`, certified by one doubling of `N`.
pub fn hill_bands(
    curve: &PeriodicCurve,
    grid: &BrillouinGrid,
    truncation: usize,
    n_max: usize,
) -> Result<BandStructure> {
    if truncation < 2 || n_max == 0 || n_max > 2 * truncation - 2 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n_max <= 2N-2, got n_max={n_max}, N={truncation}"
        )));
    }
    if (grid.period - curve.length()).abs() > 1e-12 * curve.length() {
        return Err(Error::InvalidArgument(format!(
            "grid period {} differs from curve length {}",
            grid.period,
            curve.length()
        )));
    }
    let coarse = potential_coeffs(curve, truncation)?;
    let fine = potential_coeffs(curve, 2 * truncation)?;
    let rows: Vec<(Vec<f64>, f64)> = grid
        .thetas
        .par_iter()
        .map(|&theta| {
            let a = hill_eigenvalues(&coarse, theta, truncation, n_max)?;
            let b = hill_eigenvalues(&fine, theta, 2 * truncation, n_max)?;
            let shift = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            Ok((a, shift))
        })
        .collect::<Result<_>>()?;
    let shift = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if shift >= CERTIFICATION_TOLERANCE {
        return Err(Error::Convergence {
            what: format!("Hill bands at N={truncation} vs {}", 2 * truncation),
            residual: shift,
        });
    }
    let metadata = BandMetadata {
        curve: curve.spec().id(),
        dimension: curve.dimension(),
        truncation: Some(truncation),
        refinement_shift: Some(shift),
        ..Default::default()
    };
    let bands = rows
        .into_iter()
        .map(|(ev, _)| ev.into_iter().map(Some).collect())
        .collect();
    Ok(BandStructure::new(BandKind::Hill, grid.clone(), metadata, bands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvegeom::{build_curve, CurveSpec};
    use proptest::prelude::*;

    fn constant(c: f64, length: f64, n: usize) -> PotentialCoeffs {
        PotentialCoeffs::from_samples(length, &vec![0.25 * c * c; 256], n).unwrap()
    }

    fn free_bands(theta: f64, count: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (-40..=40).map(|k| (theta + k as f64).powi(2)).collect();
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    #[test]
    fn zero_potential_matrix_is_free() {
        let c = constant(0.0, 2.0 * PI, 1);
        let m = hill_matrix(&c, 0.3, 1);
        let diag: Vec<f64> = (0..3).map(|i| m.get(i, i).re).collect();
        for (d, e) in diag.iter().zip([0.49, 0.09, 1.69]) {
            assert!((d - e).abs() < 1e-14);
        }
        assert_eq!(m.get(1, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn constant_field_shifts_diagonal() {
        let c = constant(0.8, 2.0 * PI, 1);
        assert!((c.mean() - 0.16).abs() < 1e-15);
        assert!(c.get(1).norm() < 1e-15);
        let m = hill_matrix(&c, 0.3, 1);
        for (i, e) in [0.49, 0.09, 1.69].iter().enumerate() {
            assert!((m.get(i, i).re - (e - 0.16)).abs() < 1e-14);
        }
    }

    #[test]
    fn line_gives_free_bands() {
        let curve = build_curve(&CurveSpec::line(2, 2.0 * PI), 64).unwrap();
        let c = potential_coeffs(&curve, 8).unwrap();
        assert!((0..=16).all(|k| c.get(k).norm() == 0.0));
        let grid = BrillouinGrid::standard(2.0 * PI).unwrap();
        let t = hill_bands(&curve, &grid, 16, 6).unwrap();
        for (i, &theta) in grid.thetas.iter().enumerate() {
            for (n, e) in free_bands(theta, 6).iter().enumerate() {
                assert!((t.value(i, n).unwrap() - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_graph_bands_are_symmetric_and_gapped() {
        let curve = build_curve(&CurveSpec::sine_graph(2, 0.5, 2.0 * PI), 512).unwrap();
        let grid = BrillouinGrid::standard(curve.length()).unwrap();
        let t = hill_bands(&curve, &grid, DEFAULT_TRUNCATION, 4).unwrap();
        for i in 1..grid.len() {
            let j = grid.mirror(i).unwrap();
            for n in 0..4 {
                assert!((t.value(i, n).unwrap() - t.value(j, n).unwrap()).abs() < 1e-10);
            }
        }
        for i in 0..grid.len() {
            for n in 1..4 {
                assert!(t.value(i, n).unwrap() >= t.value(i, n - 1).unwrap());
            }
        }
        let edge = grid.zone_edge() - grid.delta;
        let e = hill_eigenvalues(&potential_coeffs(&curve, 64).unwrap(), edge, 64, 2).unwrap();
        assert!(e[1] - e[0] > 0.0);
        let k = grid.k_indices();
        let lo = k.iter().map(|&i| t.value(i, 0).unwrap()).fold(f64::INFINITY, f64::min);
        let hi = k.iter().map(|&i| t.value(i, 0).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo > 1e-3);
    }

    #[test]
    fn aliasing_guard_trips_on_rough_samples() {
        let samples: Vec<f64> = (0..64)
            .map(|i| 1.0 + 1e-4 * (2.0 * PI * 20.0 * i as f64 / 64.0).cos())
            .collect();
        let r = PotentialCoeffs::from_samples(1.0, &samples, 15);
        assert!(matches!(r, Err(Error::Aliasing { .. })));
    }

    #[test]
    fn bad_band_count_is_rejected() {
        let curve = build_curve(&CurveSpec::line(2, 1.0), 64).unwrap();
        let grid = BrillouinGrid::standard(1.0).unwrap();
        assert!(hill_bands(&curve, &grid, 4, 7).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn nested_truncation_is_monotone(amp in 0.05f64..0.6, frac in -1.0f64..1.0) {
            let curve = build_curve(&CurveSpec::sine_graph(2, amp, 2.0 * PI), 256).unwrap();
            let theta = frac * PI / curve.length();
            let c = potential_coeffs(&curve, 24).unwrap();
            let mut prev = hill_eigenvalues(&c, theta, 4, 6).unwrap();
            for n in 5..=24 {
                let next = hill_eigenvalues(&c, theta, n, 6).unwrap();
                for (p, q) in prev.iter().zip(&next) {
                    prop_assert!(*q <= *p + 1e-12);
                }
                prev = next;
            }
        }

        #[test]
        fn constant_field_is_rigid_shift(c in 0.0f64..2.0, frac in -1.0f64..1.0) {
            let theta = 0.5 * frac;
            let coeffs = constant(c, 2.0 * PI, 10);
            let ev = hill_eigenvalues(&coeffs, theta, 10, 5).unwrap();
            for (e, f) in ev.iter().zip(free_bands(theta, 5)) {
                prop_assert!((e - (f - c * c / 4.0)).abs() < 1e-11);
            }
        }
    }
}
