//! Scaled fibre operator of a Dirichlet tube,
//! `(-i d/ds + theta) h_a^-2 (-i d/ds + theta) - a^-2 Delta_D + V_a`,
//! in the product basis `exp(2 pi i n s / L) (x) chi_j`.
//!
//! Flattening: basis index `(n + N) * J + j` for `n = -N..=N`, `j = 0..J`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{BandKind, BandMetadata, BandStructure, BrillouinGrid};
use crate::curvegeom::{check_admissible, PeriodicCurve, TransversePoint};
use crate::eigen::HermitianMatrix;
use crate::error::{Error, Result};
use crate::fourier;
use crate::transverse::{disk_basis, interval_basis, TransverseBasis};

pub const DEFAULT_TRUNCATION: usize = 16;
pub const DEFAULT_TRANSVERSE_MODES: usize = 4;
pub const ALIASING_LIMIT: f64 = 1e-10;
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Refinement shift limit in units of `a^-2`.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn default_modes() -> usize {
    DEFAULT_TRANSVERSE_MODES
}

fn default_window() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeConfig {
    pub radius: f64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_modes")]
    pub transverse_modes: usize,
    /// transverse Gauss-Legendre order; defaults to the basis' own choice
    #[serde(default)]
    pub quadrature_order: Option<usize>,
    /// `n0`; the window is `a^-2 kappa_1^2 + ((2 n0 - 1) pi / L)^2`
    #[serde(default = "default_window")]
    pub window_index: usize,
}

impl TubeConfig {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            truncation: DEFAULT_TRUNCATION,
            transverse_modes: DEFAULT_TRANSVERSE_MODES,
            quadrature_order: None,
            window_index: 1,
        }
    }

    pub fn with_window(mut self, n0: usize) -> Self {
        self.window_index = n0;
        self
    }

    pub fn with_truncation(mut self, n: usize, j: usize) -> Self {
        self.truncation = n;
        self.transverse_modes = j;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tube radius must be positive, got {}",
                self.radius
            )));
        }
        if self.truncation < 1 || self.transverse_modes < 1 || self.window_index < 1 {
            return Err(Error::InvalidArgument(
                "N, J and n0 must all be at least 1".into(),
            ));
        }
        if matches!(self.quadrature_order, Some(q) if q < 2) {
            return Err(Error::InvalidArgument("quadrature order must be >= 2".into()));
        }
        Ok(())
    }

    /// `E_{n0} = ((2 n0 - 1) pi / L)^2`.
    pub fn window_energy(&self, length: f64) -> f64 {
        ((2 * self.window_index - 1) as f64 * PI / length).powi(2)
    }

    pub fn basis(&self, dimension: usize) -> Result<TransverseBasis> {
        let basis = match dimension {
            2 => interval_basis(self.transverse_modes),
            3 => disk_basis(self.transverse_modes)?,
            d => {
                return Err(Error::InvalidArgument(format!(
                    "tubes need dimension 2 or 3, got {d}"
                )))
            }
        };
        Ok(match self.quadrature_order {
            Some(q) => basis.with_quadrature_order(q),
            None => basis,
        })
    }
}

/// Curve data at one arclength value.
#[derive(Debug, Clone, Copy)]
struct Frame {
    gamma: f64,
    gamma_d1: f64,
    gamma_d2: f64,
    torsion: f64,
    torsion_d1: f64,
    rotation: f64,
}

impl Frame {
    fn at_grid(curve: &PeriodicCurve, i: usize) -> Self {
        Self {
            gamma: curve.curvature()[i],
            gamma_d1: curve.curvature_d1()[i],
            gamma_d2: curve.curvature_d2()[i],
            torsion: curve.torsion()[i],
            torsion_d1: curve.torsion_d1()[i],
            rotation: curve.rotation()[i],
        }
    }

    fn at(curve: &PeriodicCurve, s: f64) -> Self {
        let l = curve.length();
        let interp = |v: &[f64]| fourier::interpolate(&fourier::forward_real(v), l, s).re;
        Self {
            gamma: interp(curve.curvature()),
            gamma_d1: interp(curve.curvature_d1()),
            gamma_d2: interp(curve.curvature_d2()),
            torsion: interp(curve.torsion()),
            torsion_d1: interp(curve.torsion_d1()),
            rotation: curve.rotation_at(s),
        }
    }

    /// `(h, h_s, h_ss)` at a physical transverse point.
    fn jacobian(&self, p: TransversePoint) -> (f64, f64, f64) {
        match p {
            TransversePoint::Interval(u) => (
                1.0 + u * self.gamma,
                u * self.gamma_d1,
                u * self.gamma_d2,
            ),
            TransversePoint::Disk { r, angle } => {
                let (sn, cs) = (angle - self.rotation).sin_cos();
                let (g, g1, g2) = (self.gamma, self.gamma_d1, self.gamma_d2);
                let (t, t1) = (self.torsion, self.torsion_d1);
                (
                    1.0 + r * g * cs,
                    r * (g1 * cs + g * t * sn),
                    r * ((g2 - g * t * t) * cs + (2.0 * g1 * t + g * t1) * sn),
                )
            }
        }
    }

    fn potential(&self, p: TransversePoint) -> Result<(f64, f64)> {
        let (h, hs, hss) = self.jacobian(p);
        if h <= 0.0 {
            return Err(Error::Inadmissible(format!("Jacobian h = {h} <= 0")));
        }
        let v = -self.gamma * self.gamma / (4.0 * h * h) + hss / (2.0 * h.powi(3))
            - 5.0 * hs * hs / (4.0 * h.powi(4));
        Ok((h, v))
    }
}

/// `V = -gamma^2/(4h^2) + h_ss/(2h^3) - 5 h_s^2/(4h^4)` at arclength `s` and a physical
/// transverse point (`|u| < a`).
pub fn effective_potential(curve: &PeriodicCurve, s: f64, p: TransversePoint) -> Result<f64> {
    match (curve.dimension(), p) {
        (2, TransversePoint::Interval(_)) | (3, TransversePoint::Disk { .. }) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "transverse point does not match the curve dimension".into(),
            ))
        }
    }
    Frame::at(curve, s).potential(p).map(|(_, v)| v)
}

fn scaled(p: TransversePoint, a: f64) -> TransversePoint {
    match p {
        TransversePoint::Interval(u) => TransversePoint::Interval(a * u),
        TransversePoint::Disk { r, angle } => TransversePoint::Disk { r: a * r, angle },
    }
}

/// Fourier coefficients (`|k| <= 2N`) of the transverse overlaps `(h_a^-2)_{jk}(s)` and
/// `V_{a,jk}(s)`.
#[derive(Debug, Clone)]
pub struct OverlapTables {
    length: f64,
    radius: f64,
    truncation: usize,
    modes: usize,
    kappa_sq: Vec<f64>,
    inverse_metric: Vec<Vec<Complex64>>,
    potential: Vec<Vec<Complex64>>,
}

/// Samples `f_{jk}(s_i)` for `j <= k`, packed by `pair(j, k)`.
struct Samples {
    inverse_metric: Vec<Vec<f64>>,
    potential: Vec<Vec<f64>>,
}

fn pair(j: usize, k: usize, modes: usize) -> usize {
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    j * modes - j * (j + 1) / 2 + k
}

fn sample_overlaps(curve: &PeriodicCurve, basis: &TransverseBasis, a: f64) -> Result<Samples> {
    let jn = basis.len();
    let npairs = jn * (jn + 1) / 2;
    let quad = basis.quadrature();
    let table = basis.tabulate();
    let mut weighted = vec![vec![0.0; quad.len()]; npairs];
    for j in 0..jn {
        for k in j..jn {
            let row = &mut weighted[pair(j, k, jn)];
            for q in 0..quad.len() {
                row[q] = quad.weights[q] * table[j][q] * table[k][q];
            }
        }
    }
    let points: Vec<TransversePoint> = quad.points.iter().map(|&p| scaled(p, a)).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..curve.grid_len())
        .into_par_iter()
        .map(|i| {
            let frame = Frame::at_grid(curve, i);
            let mut hinv = Vec::with_capacity(points.len());
            let mut pot = Vec::with_capacity(points.len());
            for &p in &points {
                let (h, v) = frame.potential(p).map_err(|_| {
                    Error::Inadmissible(format!(
                        "Jacobian vanishes inside the tube at s = {}",
                        curve.arclength(i)
                    ))
                })?;
                hinv.push(1.0 / (h * h));
                pot.push(v);
            }
            let dot = |w: &[f64], f: &[f64]| w.iter().zip(f).map(|(x, y)| x * y).sum::<f64>();
            Ok((
                weighted.iter().map(|w| dot(w, &hinv)).collect(),
                weighted.iter().map(|w| dot(w, &pot)).collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let m = rows.len();
    let mut out = Samples {
        inverse_metric: vec![vec![0.0; m]; npairs],
        potential: vec![vec![0.0; m]; npairs],
    };
    for (i, (h, v)) in rows.into_iter().enumerate() {
        for p in 0..npairs {
            out.inverse_metric[p][i] = h[p];
            out.potential[p][i] = v[p];
        }
    }
    Ok(out)
}

fn max_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Coefficients `|k| <= 2N` of every series, with the tail guard measured against the
/// total energy of the table.
fn coefficients(series: &[Vec<f64>], truncation: usize) -> Result<Vec<Vec<Complex64>>> {
    let n = truncation as i64;
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut out = Vec::with_capacity(series.len());
    for s in series {
        let m = s.len();
        let hat = fourier::forward_real(s);
        total += hat.iter().map(|c| c.norm_sqr()).sum::<f64>();
        tail += (n + 1..=2 * n)
            .map(|k| hat[fourier::slot(k, m)].norm_sqr() + hat[fourier::slot(-k, m)].norm_sqr())
            .sum::<f64>();
        let mut c = vec![Complex64::new(0.0, 0.0); (4 * n + 1) as usize];
        for k in 0..=2 * n {
            let v = 0.5 * (hat[fourier::slot(k, m)] + hat[fourier::slot(-k, m)].conj());
            c[(2 * n + k) as usize] = v;
            c[(2 * n - k) as usize] = v.conj();
        }
        out.push(c);
    }
    if total > 0.0 && tail / total >= ALIASING_LIMIT {
        return Err(Error::Aliasing {
            fraction: tail / total,
            limit: ALIASING_LIMIT,
        });
    }
    Ok(out)
}

/// Builds both overlap tables for truncation `N`; the curve is rebuilt on a finer grid when
/// it cannot resolve `|k| <= 2N`.
pub fn overlap_tables(
    curve: &PeriodicCurve,
    basis: &TransverseBasis,
    radius: f64,
    truncation: usize,
) -> Result<OverlapTables> {
    if basis.dimension() != curve.dimension() {
        return Err(Error::InvalidArgument(format!(
            "transverse basis is for d = {}, curve has d = {}",
            basis.dimension(),
            curve.dimension()
        )));
    }
    let rebuilt;
    let curve = if curve.grid_len() > 4 * truncation {
        curve
    } else {
        rebuilt = curve.rebuild((4 * truncation + 1).next_power_of_two().max(64))?;
        &rebuilt
    };
    let samples = sample_overlaps(curve, basis, radius)?;
    let check = sample_overlaps(
        curve,
        &basis.with_quadrature_order(basis.quadrature_order() + 8),
        radius,
    )?;
    let change = max_difference(&samples.inverse_metric, &check.inverse_metric)
        .max(max_difference(&samples.potential, &check.potential));
    if change > QUADRATURE_TOLERANCE {
        return Err(Error::QuadratureUnderresolved { change });
    }
    Ok(OverlapTables {
        length: curve.length(),
        radius,
        truncation,
        modes: basis.len(),
        kappa_sq: basis.eigenvalues().to_vec(),
        inverse_metric: coefficients(&samples.inverse_metric, truncation)?,
        potential: coefficients(&samples.potential, truncation)?,
    })
}

impl OverlapTables {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `kappa_j^2` of the unit cross-section.
    pub fn kappa_sq(&self) -> &[f64] {
        &self.kappa_sq
    }

    fn lookup(&self, table: &[Vec<Complex64>], j: usize, k: usize, n: i64) -> Complex64 {
        let n2 = 2 * self.truncation as i64;
        if n.abs() > n2 {
            return Complex64::new(0.0, 0.0);
        }
        table[pair(j, k, self.modes)][(n2 + n) as usize]
    }

    /// Coefficient `n` of `(h_a^-2)_{jk}`.
    pub fn inverse_metric(&self, j: usize, k: usize, n: i64) -> Complex64 {
        self.lookup(&self.inverse_metric, j, k, n)
    }

    /// Coefficient `n` of `V_{a,jk}`.
    pub fn potential(&self, j: usize, k: usize, n: i64) -> Complex64 {
        self.lookup(&self.potential, j, k, n)
    }

    /// Adds a constant to the potential.
    pub fn shift_potential(&mut self, c: f64) {
        let n2 = 2 * self.truncation;
        for j in 0..self.modes {
            self.potential[pair(j, j, self.modes)][n2] += c;
        }
    }
}

/// Fibre matrix at quasimomentum `theta`, dimension `(2N+1) J`.
pub fn assemble_fibre(tables: &OverlapTables, theta: f64) -> HermitianMatrix {
    let n = tables.truncation as i64;
    let jn = tables.modes;
    let scale = tables.radius.powi(-2);
    let l = tables.length;
    let q = |m: i64| 2.0 * PI * m as f64 / l + theta;
    HermitianMatrix::from_lower((2 * tables.truncation + 1) * jn, |row, col| {
        let (nr, jr) = ((row / jn) as i64 - n, row % jn);
        let (nc, jc) = ((col / jn) as i64 - n, col % jn);
        let d = nr - nc;
        let mut z = q(nr) * q(nc) * tables.inverse_metric(jr, jc, d) + tables.potential(jr, jc, d);
        if row == col {
            z += scale * tables.kappa_sq[jr];
        }
        z
    })
}

/// Eigenvalues of the fibre matrix strictly below `top`, ascending.
pub fn fibre_eigenvalues_below(tables: &OverlapTables, theta: f64, top: f64) -> Result<Vec<f64>> {
    let mut ev = assemble_fibre(tables, theta).eigenvalues()?;
    ev.retain(|&e| e < top);
    Ok(ev)
}

/// Band functions below `a^-2 kappa_1^2 + E_{n0}` on `grid`, certified by one
/// `(N, J) -> (2N, J + 2)` refinement. The number of bands found per quasimomentum is
/// reported through the table, not enforced.
pub fn tube_bands(
    curve: &PeriodicCurve,
    config: &TubeConfig,
    grid: &BrillouinGrid,
) -> Result<BandStructure> {
    config.validate()?;
    let a = config.radius;
    if (grid.period - curve.length()).abs() > 1e-12 * curve.length() {
        return Err(Error::InvalidArgument(format!(
            "grid period {} differs from curve length {}",
            grid.period,
            curve.length()
        )));
    }
    if curve.dimension() == 3 && !curve.rotation_is_periodic() {
        return Err(Error::Inadmissible(format!(
            "total torsion {} is not a multiple of 2 pi; the rotated frame is not periodic",
            curve.total_torsion()
        )));
    }
    let adm = check_admissible(curve, a);
    if !adm.admissible() {
        return Err(Error::Inadmissible(format!(
            "tube of radius {a} is not admissible: a * max curvature = {}, minimum distance {} vs {}",
            a * adm.max_curvature,
            adm.min_distance,
            adm.separation_threshold
        )));
    }
    let (n, j) = (config.truncation, config.transverse_modes);
    let coarse_basis = config.basis(curve.dimension())?;
    let fine_config = config.clone().with_truncation(2 * n, j + 2);
    let fine_basis = fine_config.basis(curve.dimension())?;
    let coarse = overlap_tables(curve, &coarse_basis, a, n)?;
    let fine = overlap_tables(curve, &fine_basis, a, 2 * n)?;
    let threshold = coarse.kappa_sq()[0] / (a * a);
    let top = threshold + config.window_energy(curve.length());

    let rows: Vec<(Vec<f64>, f64)> = grid
        .thetas
        .par_iter()
        .map(|&theta| {
            let c = fibre_eigenvalues_below(&coarse, theta, top)?;
            let mut f = assemble_fibre(&fine, theta).eigenvalues()?;
            f.truncate(c.len());
            let shift = c
                .iter()
                .zip(&f)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            Ok((c, shift))
        })
        .collect::<Result<_>>()?;
    let shift = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if shift >= REFINEMENT_TOLERANCE / (a * a) {
        return Err(Error::Convergence {
            what: format!("tube bands at (N, J) = ({n}, {j}) vs ({}, {})", 2 * n, j + 2),
            residual: shift,
        });
    }
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    if width == 0 {
        return Err(Error::EmptyWindow { top });
    }
    let bands = rows
        .into_iter()
        .map(|(ev, _)| {
            let mut row: Vec<Option<f64>> = ev.into_iter().map(Some).collect();
            row.resize(width, None);
            row
        })
        .collect();
    let metadata = BandMetadata {
        curve: curve.spec().id(),
        dimension: curve.dimension(),
        radius: Some(a),
        truncation: Some(n),
        transverse_modes: Some(j),
        window_index: Some(config.window_index),
        window_top: Some(top),
        threshold: Some(threshold),
        refinement_shift: Some(shift),
        ..Default::default()
    };
    Ok(BandStructure::new(BandKind::Tube, grid.clone(), metadata, bands))
}
