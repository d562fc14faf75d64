//! Leaky wires `-Delta - alpha delta(x - Gamma)` in the plane: Floquet bands below zero via
//! the Birman-Schwinger condition `alpha mu_n(theta, E) = 1`, with `mu_n` the `n`-th largest
//! eigenvalue of the quasi-periodic single-layer operator on one period of the curve.
//!
//! Densities are written as `exp(i theta' s) phi(s)` with `theta' = theta |b| / L`, so the
//! discretized kernel acts on `L`-periodic `phi`. The logarithmic singularity is split off
//! against `ln(4 sin^2(pi (s - t) / L))` and integrated with spectral weights on the
//! uniform arclength grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandKind, BandMetadata, BandStructure, BrillouinGrid};
use crate::curvegeom::PeriodicCurve;
use crate::eigen::HermitianMatrix;
use crate::error::{Error, Result};
use crate::special::{bessel_i0, k0, EULER_GAMMA};

pub const DEFAULT_BOUNDARY_POINTS: usize = 256;
pub const DEFAULT_BANDS: usize = 4;
pub const DEFAULT_THRESHOLD_MARGIN: f64 = 1e-3;
/// Image sums stop once the tail bound drops below this fraction of the operator scale.
pub const IMAGE_TAIL: f64 = 1e-12;
pub const ENERGY_TOLERANCE: f64 = 1e-10;
/// Largest admissible change of the top Birman-Schwinger eigenvalue under `Q -> 2Q`.
pub const GRID_TOLERANCE: f64 = 1e-8;

fn default_points() -> usize {
    DEFAULT_BOUNDARY_POINTS
}

fn default_bands() -> usize {
    DEFAULT_BANDS
}

fn default_margin() -> f64 {
    DEFAULT_THRESHOLD_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakyConfig {
    /// attractive coupling `alpha > 0`
    pub coupling: f64,
    /// minimum boundary grid size `Q` (power of two, at least 64); raised with the coupling
    /// so that the decay length `2/alpha` spans several grid spacings
    #[serde(default = "default_points")]
    pub boundary_points: usize,
    /// bands requested per quasimomentum
    #[serde(default = "default_bands")]
    pub bands: usize,
    /// bands within this distance of the threshold `0` are reported absent
    #[serde(default = "default_margin")]
    pub threshold_margin: f64,
}

impl LeakyConfig {
    pub fn new(coupling: f64) -> Self {
        Self {
            coupling,
            boundary_points: DEFAULT_BOUNDARY_POINTS,
            bands: DEFAULT_BANDS,
            threshold_margin: DEFAULT_THRESHOLD_MARGIN,
        }
    }

    pub fn with_points(mut self, q: usize) -> Self {
        self.boundary_points = q;
        self
    }

    pub fn with_bands(mut self, n: usize) -> Self {
        self.bands = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "leaky wires need an attractive coupling alpha > 0, got {}",
                self.coupling
            )));
        }
        if self.boundary_points < 64 || !self.boundary_points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "boundary grid size must be a power of two >= 64, got {}",
                self.boundary_points
            )));
        }
        if self.bands == 0 {
            return Err(Error::InvalidArgument("at least one band must be requested".into()));
        }
        if !(self.threshold_margin > 0.0 && self.threshold_margin.is_finite()) {
            return Err(Error::InvalidArgument("threshold margin must be positive".into()));
        }
        Ok(())
    }

    /// Grid size used on a period of length `length`.
    pub fn effective_points(&self, length: f64) -> usize {
        let needed = (RESOLUTION * 0.5 * self.coupling * length).ceil() as usize;
        self.boundary_points.max(needed.next_power_of_two())
    }
}

/// Grid points per decay length `1/sqrt(-zeta)` and per unit length, at least.
const RESOLUTION: f64 = 2.5;

/// Threshold of the essential spectrum of the straight wire: `-alpha^2/4` in the plane,
/// `-4 exp(2(-2 pi alpha + psi(1)))` in space.
pub fn zeta(alpha: f64, dimension: usize) -> Result<f64> {
    match dimension {
        2 if alpha >= 0.0 => Ok(-alpha * alpha / 4.0),
        2 => Err(Error::InvalidArgument(format!(
            "d = 2 needs alpha >= 0, got {alpha}"
        ))),
        3 if alpha <= 0.0 => Ok(-4.0 * (2.0 * (-2.0 * PI * alpha - EULER_GAMMA)).exp()),
        3 => Err(Error::InvalidArgument(format!(
            "d = 3 needs alpha <= 0, got {alpha}"
        ))),
        d => Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {d}"))),
    }
}

/// Value of the quasi-periodic Green's function with its direct (`k = 0`) term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenSum {
    pub total: Complex64,
    pub direct: Complex64,
    /// largest `|k|` summed
    pub images: usize,
}

type P2 = [f64; 2];

fn dist(x: P2, y: P2) -> f64 {
    (x[0] - y[0]).hypot(x[1] - y[1])
}

/// Smallest `K` with `sum_{|k| > K} K0(kappa |d - k b|) <= tol`, given `|d| <= reach`.
fn image_cutoff(kappa: f64, bnorm: f64, reach: f64, tol: f64) -> usize {
    let ratio = 1.0 / (1.0 - (-kappa * bnorm).exp());
    let mut k = 0usize;
    loop {
        let d = kappa * ((k + 1) as f64 * bnorm - reach);
        if d > 0.5 {
            let bound = 2.0 * (PI / (2.0 * d)).sqrt() * (-d).exp() * ratio;
            if bound < tol {
                return k;
            }
        }
        k += 1;
        assert!(k < 10_000_000, "image sum cannot converge for E < 0");
    }
}

/// `sum_k exp(i k theta |b|) (1/2 pi) K0(sqrt(-E) |x - x' - k b|)`, which satisfies
/// `G(x + b, x') = exp(i theta |b|) G(x, x')`. The direct term is `NaN`-free only for
/// `x != x'`; the coincident case is left to the caller.
pub fn periodized_green(e: f64, theta: f64, x: P2, xp: P2, b: P2) -> Result<GreenSum> {
    if !(e < 0.0) {
        return Err(Error::AboveThreshold {
            energy: e,
            threshold: 0.0,
        });
    }
    let kappa = (-e).sqrt();
    let bnorm = b[0].hypot(b[1]);
    let d = [x[0] - xp[0], x[1] - xp[1]];
    let reach = d[0].hypot(d[1]);
    let kmax = image_cutoff(kappa, bnorm, reach, IMAGE_TAIL * 2.0 * PI / (2.0 * kappa * bnorm));
    let term = |k: i64| {
        let r = dist(d, [k as f64 * b[0], k as f64 * b[1]]);
        let phase = Complex64::from_polar(1.0, k as f64 * theta * bnorm);
        phase * k0(kappa * r) / (2.0 * PI)
    };
    let direct = if reach > 0.0 {
        term(0)
    } else {
        Complex64::new(f64::INFINITY, 0.0)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for k in 1..=kmax as i64 {
        total += term(k) + term(-k);
    }
    Ok(GreenSum {
        total: total + direct,
        direct,
        images: kmax,
    })
}

/// Checks that the open slab orthogonal to `b`, placed at some grid point, meets the curve
/// in a single arc: the projection onto `b` must stay within one period over one period.
pub fn check_period_cell(curve: &PeriodicCurve) -> Result<()> {
    let b = curve.translation();
    let bnorm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    let proj: Vec<f64> = curve
        .points()
        .iter()
        .map(|p| (p[0] * b[0] + p[1] * b[1] + p[2] * b[2]) / bnorm)
        .collect();
    let m = proj.len();
    let ok = (0..m).any(|start| {
        let c = proj[start];
        (0..m).all(|k| {
            let i = (start + k) % m;
            let p = if i >= start { proj[i] } else { proj[i] + bnorm };
            let rel = p - c;
            rel >= -1e-12 * bnorm && rel < bnorm
        })
    });
    if ok {
        Ok(())
    } else {
        Err(Error::PeriodCell(
            "no slab orthogonal to b meets the curve in a single arc".into(),
        ))
    }
}

/// θ-independent discretization data of one period.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    length: f64,
    b: P2,
    bnorm: f64,
    points: Vec<P2>,
    /// spectral weights for the `ln(4 sin^2)` kernel by index difference
    log_weights: Vec<f64>,
    /// `ln(4 sin^2(pi m / Q))` by index difference (unused at `m = 0`)
    log_values: Vec<f64>,
    /// largest in-cell distance
    reach: f64,
}

impl BoundaryGrid {
    pub fn new(curve: &PeriodicCurve, q: usize) -> Result<Self> {
        if curve.dimension() != 2 {
            return Err(Error::InvalidArgument(
                "leaky-wire bands are implemented for planar curves only".into(),
            ));
        }
        let rebuilt;
        let curve = if curve.grid_len() == q {
            curve
        } else {
            rebuilt = curve.rebuild(q)?;
            &rebuilt
        };
        let length = curve.length();
        let t = curve.translation();
        let b = [t[0], t[1]];
        let points: Vec<P2> = curve.points().iter().map(|p| [p[0], p[1]]).collect();
        let n = q / 2;
        let log_weights = (0..q)
            .map(|m| {
                let x = 2.0 * PI * m as f64 / q as f64;
                let sum: f64 = (1..n).map(|k| (k as f64 * x).cos() / k as f64).sum();
                let tail = PI / (n * n) as f64 * (n as f64 * x).cos();
                length / (2.0 * PI) * (-(2.0 * PI / n as f64) * sum - tail)
            })
            .collect();
        let log_values = (0..q)
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    (4.0 * (PI * m as f64 / q as f64).sin().powi(2)).ln()
                }
            })
            .collect();
        let reach = points
            .iter()
            .map(|p| dist(*p, points[0]))
            .fold(0.0, f64::max)
            * 2.0;
        Ok(Self {
            length,
            b,
            bnorm: b[0].hypot(b[1]),
            points,
            log_weights,
            log_values,
            reach,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn translation_norm(&self) -> f64 {
        self.bnorm
    }
}

/// Discretized Birman-Schwinger operator at `(theta, E)`.
#[derive(Debug, Clone)]
pub struct BsKernel {
    pub theta: f64,
    pub energy: f64,
    pub matrix: HermitianMatrix,
}

impl BsKernel {
    /// Eigenvalues `mu_1 >= mu_2 >= ...`.
    pub fn eigenvalues_desc(&self) -> Result<Vec<f64>> {
        let mut ev = self.matrix.eigenvalues()?;
        ev.reverse();
        Ok(ev)
    }
}

/// Nyström matrix of the single-layer operator `S(theta, E)` on `Q` points.
pub fn bs_matrix(grid: &BoundaryGrid, theta: f64, e: f64) -> Result<BsKernel> {
    if !(e < 0.0) {
        return Err(Error::AboveThreshold {
            energy: e,
            threshold: 0.0,
        });
    }
    let q = grid.len();
    let l = grid.length;
    let h = l / q as f64;
    let kappa = (-e).sqrt();
    let bnorm = grid.bnorm;
    let theta_s = theta * bnorm / l;
    let tol = IMAGE_TAIL * 2.0 * PI / (2.0 * kappa * l);
    let kmax = image_cutoff(kappa, bnorm, grid.reach, tol) as i64;
    let sigma_w = (6.0 / kappa).min(l / 8.0);
    let image_phase: Vec<Complex64> = (-kmax..=kmax)
        .map(|k| Complex64::from_polar(1.0, k as f64 * theta * bnorm))
        .collect();
    let diag_images: Complex64 = (1..=kmax)
        .map(|k| {
            let g = k0(kappa * k as f64 * bnorm) / (2.0 * PI);
            (image_phase[(kmax + k) as usize] + image_phase[(kmax - k) as usize]) * g
        })
        .sum();
    let diag = Complex64::new(
        (-EULER_GAMMA - (kappa * l / (4.0 * PI)).ln()) / (2.0 * PI),
        0.0,
    ) + diag_images;
    let diag_entry = grid.log_weights[0] * (-1.0 / (4.0 * PI)) + h * diag;

    let rows: Vec<Vec<Complex64>> = (0..q)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(i + 1);
            for j in 0..i {
                let m = i - j;
                // nearest image of t_j in arclength
                let shift: i64 = if 2 * m > q { 1 } else { 0 };
                let sigma = (m as f64 - shift as f64 * q as f64) * h;
                let d = [
                    grid.points[i][0] - grid.points[j][0],
                    grid.points[i][1] - grid.points[j][1],
                ];
                let mut sum = Complex64::new(0.0, 0.0);
                for k in -kmax..=kmax {
                    let r = (d[0] - k as f64 * grid.b[0]).hypot(d[1] - k as f64 * grid.b[1]);
                    sum += image_phase[(k + kmax) as usize] * k0(kappa * r);
                }
                let phase = Complex64::from_polar(1.0, -theta_s * (m as f64 * h));
                let full = phase * sum / (2.0 * PI);
                let r_near = (d[0] - shift as f64 * grid.b[0]).hypot(d[1] - shift as f64 * grid.b[1]);
                let chord = (l / PI) * (PI * sigma / l).sin();
                let w = (-(chord / sigma_w).powi(4)).exp();
                let k1 = if w > 0.0 {
                    Complex64::from_polar(1.0, -theta_s * sigma)
                        * (-bessel_i0(kappa * r_near) * w / (4.0 * PI))
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let k2 = full - k1 * grid.log_values[m];
                row.push(k1 * grid.log_weights[m] + k2 * h);
            }
            row.push(diag_entry);
            row
        })
        .collect();
    let matrix = HermitianMatrix::from_lower(q, |i, j| rows[i][j]);
    Ok(BsKernel {
        theta,
        energy: e,
        matrix,
    })
}

/// Birman-Schwinger spectra at several energies for one quasimomentum, shared by all bands.
struct Spectra<'a> {
    grid: &'a BoundaryGrid,
    theta: f64,
    alpha: f64,
    samples: Vec<(f64, Vec<f64>)>,
}

impl<'a> Spectra<'a> {
    /// `alpha^2/4 - 1/(4 mu_n^2)`: increasing in `E`, zero exactly where `alpha mu_n = 1`,
    /// and linear in `E` for a straight wire.
    fn value(&self, mu: &[f64], n: usize) -> f64 {
        let m = mu[n];
        if m > 0.0 {
            0.25 * (self.alpha * self.alpha - 1.0 / (m * m))
        } else {
            f64::NEG_INFINITY
        }
    }

    fn g(&mut self, e: f64, n: usize) -> Result<f64> {
        if let Some(i) = self.samples.iter().position(|s| s.0 == e) {
            return Ok(self.value(&self.samples[i].1, n));
        }
        let mu = bs_matrix(self.grid, self.theta, e)?.eigenvalues_desc()?;
        let v = self.value(&mu, n);
        self.samples.push((e, mu));
        Ok(v)
    }

    /// Tightest bracket `(lo, g(lo) < 0, hi, g(hi) >= 0)` for band `n` among the samples.
    fn bracket(&self, n: usize) -> (f64, f64, f64, f64) {
        let mut lo = (f64::NEG_INFINITY, 0.0);
        let mut hi = (f64::INFINITY, 0.0);
        for (e, mu) in &self.samples {
            let g = self.value(mu, n);
            if g < 0.0 && *e > lo.0 {
                lo = (*e, g);
            }
            if g >= 0.0 && *e < hi.0 {
                hi = (*e, g);
            }
        }
        (lo.0, lo.1, hi.0, hi.1)
    }

    /// Root of the increasing function `g_n` by the Illinois variant of regula falsi with a
    /// bisection fallback when the bracket stops halving.
    fn solve(&mut self, n: usize) -> Result<f64> {
        let (mut lo, mut glo, mut hi, mut ghi) = self.bracket(n);
        let mut side = 0i8;
        let mut width = hi - lo;
        let mut last = f64::NAN;
        for iter in 0..200 {
            if hi - lo < ENERGY_TOLERANCE {
                return Ok(if glo.is_finite() && ghi > glo {
                    (lo * ghi - hi * glo) / (ghi - glo)
                } else {
                    0.5 * (lo + hi)
                });
            }
            let mut e = if glo.is_finite() {
                (lo * ghi - hi * glo) / (ghi - glo)
            } else {
                0.5 * (lo + hi)
            };
            if iter % 4 == 3 {
                if hi - lo > 0.5 * width {
                    e = 0.5 * (lo + hi);
                }
                width = hi - lo;
            }
            // close the bracket once the estimate has settled
            if (e - last).abs() < 0.25 * ENERGY_TOLERANCE {
                e = if side == -1 {
                    last + 0.5 * ENERGY_TOLERANCE
                } else {
                    last - 0.5 * ENERGY_TOLERANCE
                };
            }
            if !(e > lo && e < hi) {
                e = 0.5 * (lo + hi);
            }
            let g = self.g(e, n)?;
            last = e;
            if g < 0.0 {
                lo = e;
                glo = g;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = e;
                ghi = g;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
        Err(Error::Convergence {
            what: format!("band {} at theta = {}", n + 1, self.theta),
            residual: hi - lo,
        })
    }
}

fn solve_bands(
    grid: &BoundaryGrid,
    config: &LeakyConfig,
    theta: f64,
    count: usize,
) -> Result<Vec<Option<f64>>> {
    let alpha = config.coupling;
    let top = -config.threshold_margin;
    let mut lower = 2.0 * zeta(alpha, 2)?;
    if lower >= top {
        return Ok(vec![None; count]);
    }
    let mut spectra = Spectra {
        grid,
        theta,
        alpha,
        samples: Vec::new(),
    };
    let mut tries = 0;
    while spectra.g(lower, 0)? >= 0.0 {
        tries += 1;
        if tries > 4 {
            return Err(Error::Convergence {
                what: format!("lower energy bracket at theta = {theta}"),
                residual: lower,
            });
        }
        lower *= 2.0;
    }
    // Upper brackets come from a ladder of energies approaching -eta, sampled only as far
    // as each band needs; small |E| is expensive because the lattice sums converge slowly.
    let mut ladder = 0.5 * zeta(alpha, 2)?;
    let mut reached_top = false;
    let mut out = vec![None; count];
    for (n, slot) in out.iter_mut().enumerate() {
        loop {
            let bracketed = spectra.bracket(n).2.is_finite();
            if bracketed || reached_top {
                break;
            }
            let e = if ladder < top { ladder } else { top };
            reached_top = e == top;
            spectra.g(e, n)?;
            ladder *= 0.25;
        }
        if !spectra.bracket(n).2.is_finite() {
            break;
        }
        *slot = Some(spectra.solve(n)?);
    }
    Ok(out)
}

/// Band `n` (1-based) at one quasimomentum, or `None` if it does not exist below
/// `-threshold_margin`.
pub fn leaky_band(
    curve: &PeriodicCurve,
    config: &LeakyConfig,
    theta: f64,
    n: usize,
) -> Result<Option<f64>> {
    config.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("band indices start at 1".into()));
    }
    check_period_cell(curve)?;
    let grid = BoundaryGrid::new(curve, config.effective_points(curve.length()))?;
    Ok(solve_bands(&grid, config, theta, n)?[n - 1])
}

/// Change of the top Birman-Schwinger eigenvalue under `Q -> 2Q` at `(theta, E)`.
pub fn grid_refinement_shift(
    curve: &PeriodicCurve,
    q: usize,
    theta: f64,
    e: f64,
) -> Result<f64> {
    let coarse = bs_matrix(&BoundaryGrid::new(curve, q)?, theta, e)?.eigenvalues_desc()?;
    let fine = bs_matrix(&BoundaryGrid::new(curve, 2 * q)?, theta, e)?.eigenvalues_desc()?;
    Ok((coarse[0] - fine[0]).abs())
}

/// Band functions below `-threshold_margin` on `grid` (period `|b|`).
pub fn leaky_bands(
    curve: &PeriodicCurve,
    config: &LeakyConfig,
    grid: &BrillouinGrid,
) -> Result<BandStructure> {
    config.validate()?;
    check_period_cell(curve)?;
    let q = config.effective_points(curve.length());
    let boundary = BoundaryGrid::new(curve, q)?;
    if (grid.period - boundary.bnorm).abs() > 1e-12 * boundary.bnorm {
        return Err(Error::InvalidArgument(format!(
            "grid period {} differs from |b| = {}",
            grid.period, boundary.bnorm
        )));
    }
    // Time reversal: the bands are even in theta, so mirrored points are copied.
    let source: Vec<usize> = (0..grid.len())
        .map(|i| match grid.mirror(i) {
            Some(j) if grid.thetas[i] < 0.0 => j,
            _ => i,
        })
        .collect();
    let solved: Vec<Option<Vec<Option<f64>>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if source[i] == i {
                solve_bands(&boundary, config, grid.thetas[i], config.bands).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Option<f64>>> = source
        .iter()
        .map(|&j| solved[j].clone().unwrap_or_default())
        .collect();

    let probe = grid.k_indices().first().copied().unwrap_or(0);
    let e_probe = rows[probe][0].unwrap_or(zeta(config.coupling, 2)?.min(-config.threshold_margin));
    let shift = grid_refinement_shift(curve, q, grid.thetas[probe], e_probe)?;
    if shift > GRID_TOLERANCE {
        return Err(Error::Convergence {
            what: format!(
                "top Birman-Schwinger eigenvalue under Q = {} -> {}",
                q,
                2 * q
            ),
            residual: shift,
        });
    }
    let metadata = BandMetadata {
        curve: curve.spec().id(),
        dimension: 2,
        coupling: Some(config.coupling),
        boundary_points: Some(q),
        window_top: Some(-config.threshold_margin),
        threshold: Some(zeta(config.coupling, 2)?),
        translation_norm: Some(boundary.bnorm),
        refinement_shift: Some(shift),
        ..Default::default()
    };
    Ok(BandStructure::new(BandKind::Leaky, grid.clone(), metadata, rows))
}
