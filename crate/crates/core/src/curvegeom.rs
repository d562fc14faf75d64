//! Periodic curves: arclength reparametrization, Frenet data, and tube admissibility.
//!
//! Every curve is resampled on a uniform arclength grid `s_i = i L / M` and all
//! downstream quantities (curvature, torsion, rotation angle) live on that grid.
//! Derivatives along the curve are trigonometric, applied to the periodic part
//! `Gamma(s) - b s / L`.
//!
//! The planar normal is `Gamma'` rotated by `+pi/2`, so the curvature is signed and
//! the straightened-tube Jacobian reads `h = 1 + u gamma(s)` with `Gamma(s) - u n(s)`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::quadrature::GaussLegendre;

pub type Vec3 = [f64; 3];

#[inline]
fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn scale(a: Vec3, c: f64) -> Vec3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// Geometric family of a curve. Parameter periods are in length units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveShape {
    /// `t -> (t, 0[, 0])`.
    Line { period: f64 },
    /// `t -> (t, A sin(2 pi t / P)[, 0])`.
    SineGraph { amplitude: f64, period: f64 },
    /// `t -> (t, A cos(w t), A sin(w t))`, `w = 2 pi / P`; three dimensions only.
    HelixGraph { amplitude: f64, period: f64 },
    /// CSV file with header `t,x1,..,xd`, uniform `t` over one period; the last row is the
    /// first translated by the period vector.
    Sampled { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub dimension: usize,
    pub shape: CurveShape,
}

impl CurveSpec {
    pub fn line(dimension: usize, period: f64) -> Self {
        Self {
            dimension,
            shape: CurveShape::Line { period },
        }
    }

    pub fn sine_graph(dimension: usize, amplitude: f64, period: f64) -> Self {
        Self {
            dimension,
            shape: CurveShape::SineGraph { amplitude, period },
        }
    }

    pub fn helix_graph(amplitude: f64, period: f64) -> Self {
        Self {
            dimension: 3,
            shape: CurveShape::HelixGraph { amplitude, period },
        }
    }

    pub fn sampled(dimension: usize, path: impl Into<PathBuf>) -> Self {
        Self {
            dimension,
            shape: CurveShape::Sampled { path: path.into() },
        }
    }

    /// Same family with the amplitude multiplied by `t` (lines and sampled curves unchanged).
    pub fn scaled_amplitude(&self, t: f64) -> Self {
        let shape = match &self.shape {
            CurveShape::SineGraph { amplitude, period } => CurveShape::SineGraph {
                amplitude: amplitude * t,
                period: *period,
            },
            CurveShape::HelixGraph { amplitude, period } => CurveShape::HelixGraph {
                amplitude: amplitude * t,
                period: *period,
            },
            other => other.clone(),
        };
        Self {
            dimension: self.dimension,
            shape,
        }
    }

    /// Short human-readable identifier used in band-table metadata.
    pub fn id(&self) -> String {
        match &self.shape {
            CurveShape::Line { period } => format!("line(P={period})/d{}", self.dimension),
            CurveShape::SineGraph { amplitude, period } => {
                format!("sine-graph(A={amplitude},P={period})/d{}", self.dimension)
            }
            CurveShape::HelixGraph { amplitude, period } => {
                format!("helix-graph(A={amplitude},P={period})/d3")
            }
            CurveShape::Sampled { path } => {
                format!("sampled({})/d{}", path.display(), self.dimension)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::InvalidArgument(format!(
                "curve dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be finite")))
            }
        };
        match &self.shape {
            CurveShape::Line { period } => positive("period", *period),
            CurveShape::SineGraph { amplitude, period } => {
                finite("amplitude", *amplitude)?;
                positive("period", *period)
            }
            CurveShape::HelixGraph { amplitude, period } => {
                if self.dimension != 3 {
                    return Err(Error::InvalidArgument("helix-graph needs dimension 3".into()));
                }
                finite("amplitude", *amplitude)?;
                positive("period", *period)
            }
            CurveShape::Sampled { .. } => Ok(()),
        }
    }

    fn parametrization(&self) -> Result<Box<dyn Parametrization>> {
        self.validate()?;
        Ok(match &self.shape {
            CurveShape::Line { period } => Box::new(SineGraph {
                amplitude: 0.0,
                period: *period,
            }),
            CurveShape::SineGraph { amplitude, period } => Box::new(SineGraph {
                amplitude: *amplitude,
                period: *period,
            }),
            CurveShape::HelixGraph { amplitude, period } => Box::new(Helix {
                amplitude: *amplitude,
                period: *period,
            }),
            CurveShape::Sampled { path } => Box::new(Sampled::from_csv(path, self.dimension)?),
        })
    }
}

/// A regular parametrization `t -> Gamma(t)` over one parameter period.
trait Parametrization {
    fn period(&self) -> f64;
    fn translation(&self) -> Vec3;
    fn point(&self, t: f64) -> Vec3;
    fn velocity(&self, t: f64) -> Vec3;
}

struct SineGraph {
    amplitude: f64,
    period: f64,
}

impl Parametrization for SineGraph {
    fn period(&self) -> f64 {
        self.period
    }
    fn translation(&self) -> Vec3 {
        [self.period, 0.0, 0.0]
    }
    fn point(&self, t: f64) -> Vec3 {
        let w = 2.0 * PI / self.period;
        [t, self.amplitude * (w * t).sin(), 0.0]
    }
    fn velocity(&self, t: f64) -> Vec3 {
        let w = 2.0 * PI / self.period;
        [1.0, self.amplitude * w * (w * t).cos(), 0.0]
    }
}

struct Helix {
    amplitude: f64,
    period: f64,
}

impl Parametrization for Helix {
    fn period(&self) -> f64 {
        self.period
    }
    fn translation(&self) -> Vec3 {
        [self.period, 0.0, 0.0]
    }
    fn point(&self, t: f64) -> Vec3 {
        let w = 2.0 * PI / self.period;
        [t, self.amplitude * (w * t).cos(), self.amplitude * (w * t).sin()]
    }
    fn velocity(&self, t: f64) -> Vec3 {
        let w = 2.0 * PI / self.period;
        let aw = self.amplitude * w;
        [1.0, -aw * (w * t).sin(), aw * (w * t).cos()]
    }
}

/// Trigonometric interpolant of tabulated samples.
struct Sampled {
    t0: f64,
    period: f64,
    translation: Vec3,
    coeffs: [Vec<Complex64>; 3],
}

impl Sampled {
    fn from_csv(path: &Path, dimension: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_text(&text, dimension)
    }

    fn from_csv_text(text: &str, dimension: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty curve file".into()))?;
        let mut expected = vec!["t".to_string()];
        expected.extend((1..=dimension).map(|i| format!("x{i}")));
        let cols: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        if cols != expected {
            return Err(Error::InvalidArgument(format!(
                "curve file header must be `{}`, got `{header}`",
                expected.join(",")
            )));
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (k, line) in lines.enumerate() {
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| {
                Error::InvalidArgument(format!("curve file row {}: {e}", k + 2))
            })?;
            if row.len() != dimension + 1 {
                return Err(Error::InvalidArgument(format!(
                    "curve file row {} has {} columns, expected {}",
                    k + 2,
                    row.len(),
                    dimension + 1
                )));
            }
            rows.push(row);
        }
        Self::from_rows(&rows, dimension)
    }

    fn from_rows(rows: &[Vec<f64>], dimension: usize) -> Result<Self> {
        if rows.len() < 17 {
            return Err(Error::InvalidArgument(format!(
                "sampled curve needs at least 16 samples per period, got {}",
                rows.len().saturating_sub(1)
            )));
        }
        let n = rows.len() - 1;
        let t0 = rows[0][0];
        let period = rows[n][0] - t0;
        if !(period > 0.0) {
            return Err(Error::InvalidArgument("sample parameter must increase".into()));
        }
        let dt = period / n as f64;
        for (i, r) in rows.iter().enumerate() {
            if ((r[0] - t0) - i as f64 * dt).abs() > 1e-9 * period {
                return Err(Error::InvalidArgument(
                    "sampled curve parameter must be uniformly spaced".into(),
                ));
            }
        }
        let mut translation = [0.0; 3];
        for c in 0..dimension {
            translation[c] = rows[n][c + 1] - rows[0][c + 1];
        }
        if norm(translation) == 0.0 {
            return Err(Error::NonPeriodic("zero translation vector".into()));
        }
        // one-sided slopes at both ends must agree for a periodic (smooth) continuation
        let slope = |i: usize, j: usize| -> Vec3 {
            let mut v = [0.0; 3];
            for c in 0..dimension {
                v[c] = (rows[j][c + 1] - rows[i][c + 1]) / dt;
            }
            v
        };
        let start = slope(0, 1);
        let end = slope(n - 1, n);
        let mismatch = norm(sub(start, end)) / norm(start).max(norm(end)).max(1e-300);
        let curvature_scale = norm(sub(slope(1, 2), start)) / norm(start).max(1e-300);
        if mismatch > 10.0 * curvature_scale.max(1e-6) {
            return Err(Error::NonPeriodic(format!(
                "end tangent differs from start tangent (relative mismatch {mismatch:.3e})"
            )));
        }
        let mut coeffs: [Vec<Complex64>; 3] = Default::default();
        for c in 0..3 {
            let samples: Vec<f64> = (0..n)
                .map(|i| {
                    let x = if c < dimension { rows[i][c + 1] } else { 0.0 };
                    x - translation[c] * (rows[i][0] - t0) / period
                })
                .collect();
            coeffs[c] = fourier::forward_real(&samples);
        }
        Ok(Self {
            t0,
            period,
            translation,
            coeffs,
        })
    }
}

impl Parametrization for Sampled {
    fn period(&self) -> f64 {
        self.period
    }
    fn translation(&self) -> Vec3 {
        self.translation
    }
    fn point(&self, t: f64) -> Vec3 {
        let x = t - self.t0;
        let mut p = [0.0; 3];
        for c in 0..3 {
            p[c] = fourier::interpolate(&self.coeffs[c], self.period, x).re
                + self.translation[c] * x / self.period;
        }
        p
    }
    fn velocity(&self, t: f64) -> Vec3 {
        let x = t - self.t0;
        let mut v = [0.0; 3];
        for c in 0..3 {
            v[c] = fourier::interpolate_derivative(&self.coeffs[c], self.period, x, 1).re
                + self.translation[c] / self.period;
        }
        v
    }
}

/// A point of the cross-section `B_a`: a transverse offset `u` (d = 2) or polar
/// coordinates `(r, angle)` (d = 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransversePoint {
    Interval(f64),
    Disk { r: f64, angle: f64 },
}

/// Arclength-parametrized periodic curve with Frenet data on a uniform grid.
#[derive(Debug, Clone)]
pub struct PeriodicCurve {
    spec: CurveSpec,
    length: f64,
    translation: Vec3,
    parameters: Vec<f64>,
    points: Vec<Vec3>,
    tangents: Vec<Vec3>,
    normals: Vec<Vec3>,
    binormals: Vec<Vec3>,
    /// second derivative Gamma''(s) (used by consistency checks)
    accelerations: Vec<Vec3>,
    curvature: Vec<f64>,
    curvature_d1: Vec<f64>,
    curvature_d2: Vec<f64>,
    torsion: Vec<f64>,
    torsion_d1: Vec<f64>,
    rotation: Vec<f64>,
    planar: bool,
}

/// Minimum speed below which a parametrization counts as degenerate.
const MIN_SPEED: f64 = 1e-12;

/// Builds the arclength-parametrized curve on `m` grid points (`m` a power of two, `m >= 64`).
pub fn build_curve(spec: &CurveSpec, m: usize) -> Result<PeriodicCurve> {
    if m < 64 || !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "curve grid size must be a power of two >= 64, got {m}"
        )));
    }
    let param = spec.parametrization()?;
    let period = param.period();
    let b = param.translation();
    let dim = spec.dimension;

    // speed scan
    let scan = 8 * m;
    for i in 0..scan {
        let t = period * i as f64 / scan as f64;
        let speed = norm(param.velocity(t));
        if !(speed >= MIN_SPEED) {
            return Err(Error::DegenerateParametrization { t, speed });
        }
    }

    let rule = GaussLegendre::new(16);
    let panels = (m / 2).max(64);
    let width = period / panels as f64;
    let speed = |t: f64| norm(param.velocity(t));
    let mut cumulative = vec![0.0; panels + 1];
    for p in 0..panels {
        let a = p as f64 * width;
        cumulative[p + 1] = cumulative[p] + rule.integrate(a, a + width, speed);
    }
    let length = cumulative[panels];
    let arclength = |t: f64| -> f64 {
        let p = ((t / width).floor() as isize).clamp(0, panels as isize - 1) as usize;
        let a = p as f64 * width;
        cumulative[p] + rule.integrate(a, t, speed)
    };

    let mut parameters = Vec::with_capacity(m);
    for i in 0..m {
        let s = length * i as f64 / m as f64;
        let mut t = s * period / length;
        let mut converged = i == 0;
        if i == 0 {
            t = 0.0;
        }
        for _ in 0..100 {
            if converged {
                break;
            }
            let f = arclength(t) - s;
            let dt = f / speed(t);
            t = (t - dt).clamp(0.0, period);
            if dt.abs() <= 1e-15 * period.max(1.0) {
                converged = true;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "arclength inversion".into(),
                residual: (arclength(t) - s).abs(),
            });
        }
        parameters.push(t);
    }

    let points: Vec<Vec3> = parameters.iter().map(|&t| param.point(t)).collect();
    PeriodicCurve::from_samples(spec.clone(), length, b, parameters, points, dim)
}

impl PeriodicCurve {
    fn from_samples(
        spec: CurveSpec,
        length: f64,
        translation: Vec3,
        parameters: Vec<f64>,
        points: Vec<Vec3>,
        dim: usize,
    ) -> Result<Self> {
        let m = points.len();
        let h = length / m as f64;
        let mut d1 = vec![[0.0; 3]; m];
        let mut d2 = vec![[0.0; 3]; m];
        let mut d3 = vec![[0.0; 3]; m];
        for c in 0..3 {
            let periodic: Vec<f64> = (0..m)
                .map(|i| points[i][c] - translation[c] * (i as f64 * h) / length)
                .collect();
            let p1 = fourier::derivative(&periodic, length, 1);
            let p2 = fourier::derivative(&periodic, length, 2);
            let p3 = fourier::derivative(&periodic, length, 3);
            for i in 0..m {
                d1[i][c] = p1[i] + translation[c] / length;
                d2[i][c] = p2[i];
                d3[i][c] = p3[i];
            }
        }

        let mut tangents = Vec::with_capacity(m);
        let mut normals = Vec::with_capacity(m);
        let mut binormals = Vec::with_capacity(m);
        let mut curvature = Vec::with_capacity(m);
        let mut torsion = vec![0.0; m];
        let mut planar = true;

        if dim == 2 {
            for i in 0..m {
                let t = d1[i];
                let n = [-t[1], t[0], 0.0];
                tangents.push(t);
                normals.push(n);
                binormals.push([0.0, 0.0, 1.0]);
                curvature.push(t[0] * d2[i][1] - t[1] * d2[i][0]);
            }
        } else {
            match plane_normal(&points, &d1, translation) {
                Some(bn) => {
                    for i in 0..m {
                        let t = d1[i];
                        let n = cross(bn, t);
                        tangents.push(t);
                        normals.push(n);
                        binormals.push(bn);
                        curvature.push(dot(d2[i], n));
                    }
                }
                None => {
                    planar = false;
                    let kmax = d2.iter().map(|&a| norm(a)).fold(0.0, f64::max);
                    for i in 0..m {
                        let t = d1[i];
                        let k = norm(d2[i]);
                        if k <= 1e-8 * kmax.max(1.0) {
                            return Err(Error::InvalidArgument(format!(
                                "Frenet frame undefined: non-planar curve has vanishing curvature at s = {}",
                                i as f64 * h
                            )));
                        }
                        let n = scale(d2[i], 1.0 / k);
                        tangents.push(t);
                        normals.push(n);
                        binormals.push(cross(t, n));
                        curvature.push(k);
                        torsion[i] = dot(cross(t, d2[i]), d3[i]) / (k * k);
                    }
                }
            }
        }

        if curvature.iter().any(|k| k.abs() > 0.0) {
            let fraction = fourier::high_frequency_fraction(&curvature);
            if fraction > 1e-2 {
                return Err(Error::InsufficientSmoothness { fraction });
            }
        }
        let curvature_d1 = fourier::derivative(&curvature, length, 1);
        let curvature_d2 = fourier::derivative(&curvature, length, 2);
        let torsion_d1 = if planar {
            vec![0.0; m]
        } else {
            fourier::derivative(&torsion, length, 1)
        };
        let rotation = if planar {
            vec![0.0; m]
        } else {
            fourier::antiderivative(&torsion, length)
        };

        Ok(Self {
            spec,
            length,
            translation,
            parameters,
            points,
            tangents,
            normals,
            binormals,
            accelerations: d2,
            curvature,
            curvature_d1,
            curvature_d2,
            torsion,
            torsion_d1,
            rotation,
            planar,
        })
    }

    /// Rebuilds the same curve on a different grid.
    pub fn rebuild(&self, m: usize) -> Result<Self> {
        build_curve(&self.spec, m)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// Arclength period `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Period vector `b` with `Gamma(s + L) = Gamma(s) + b`.
    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn grid_len(&self) -> usize {
        self.points.len()
    }

    pub fn arclength(&self, i: usize) -> f64 {
        self.length * i as f64 / self.points.len() as f64
    }

    /// Original parameter values `t(s_i)`.
    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn binormals(&self) -> &[Vec3] {
        &self.binormals
    }

    pub fn accelerations(&self) -> &[Vec3] {
        &self.accelerations
    }

    /// Signed curvature (d = 2, planar d = 3) or Frenet curvature (non-planar d = 3).
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn curvature_d1(&self) -> &[f64] {
        &self.curvature_d1
    }

    pub fn curvature_d2(&self) -> &[f64] {
        &self.curvature_d2
    }

    pub fn torsion(&self) -> &[f64] {
        &self.torsion
    }

    pub fn torsion_d1(&self) -> &[f64] {
        &self.torsion_d1
    }

    /// Rotation angle `beta(s) = int_0^s tau`.
    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn is_planar(&self) -> bool {
        self.planar
    }

    /// `int_0^L tau ds`.
    pub fn total_torsion(&self) -> f64 {
        self.torsion.iter().sum::<f64>() * self.length / self.grid_len() as f64
    }

    /// Whether the rotation angle advances by a multiple of `2 pi` per period, which the
    /// three-dimensional fibre coefficients need in order to be `L`-periodic.
    pub fn rotation_is_periodic(&self) -> bool {
        let total = self.total_torsion();
        let turns = (total / (2.0 * PI)).round();
        (total - 2.0 * PI * turns).abs() < 1e-8
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.iter().fold(0.0, |a, k| a.max(k.abs()))
    }

    /// Curvature at an arbitrary arclength by trigonometric interpolation.
    pub fn curvature_at(&self, s: f64) -> f64 {
        let c = fourier::forward_real(&self.curvature);
        fourier::interpolate(&c, self.length, s).re
    }

    /// Rotation angle at an arbitrary arclength: linear drift plus interpolated periodic part.
    pub fn rotation_at(&self, s: f64) -> f64 {
        if self.planar {
            return 0.0;
        }
        let m = self.grid_len() as f64;
        let rate = self.total_torsion() / self.length;
        let periodic: Vec<f64> = self
            .rotation
            .iter()
            .enumerate()
            .map(|(i, b)| b - rate * self.length * i as f64 / m)
            .collect();
        let c = fourier::forward_real(&periodic);
        rate * s + fourier::interpolate(&c, self.length, s).re
    }

    /// Jacobian `h = 1 + u gamma` (d = 2) or `1 + r gamma cos(angle - beta)` (d = 3) at grid point `i`.
    pub fn jacobian_at(&self, i: usize, p: TransversePoint) -> f64 {
        jacobian_from(self.curvature[i], self.rotation[i], p)
    }
}

fn jacobian_from(gamma: f64, beta: f64, p: TransversePoint) -> f64 {
    match p {
        TransversePoint::Interval(u) => 1.0 + u * gamma,
        TransversePoint::Disk { r, angle } => 1.0 + r * gamma * (angle - beta).cos(),
    }
}

/// Jacobian of the straightening map at arclength `s` and transverse point `p`.
/// Fails when `h <= 0`, which signals an inadmissible `(a, curve)` pair.
pub fn jacobian_h(curve: &PeriodicCurve, s: f64, p: TransversePoint) -> Result<f64> {
    match (curve.dimension(), p) {
        (2, TransversePoint::Interval(_)) | (3, TransversePoint::Disk { .. }) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "transverse point does not match the curve dimension".into(),
            ))
        }
    }
    let h = jacobian_from(curve.curvature_at(s), curve.rotation_at(s), p);
    if h <= 0.0 {
        return Err(Error::Inadmissible(format!(
            "Jacobian h = {h} <= 0 at s = {s}"
        )));
    }
    Ok(h)
}

/// Normal of the plane containing the curve, if it is planar. Lines get any fixed
/// unit vector orthogonal to their direction.
fn plane_normal(points: &[Vec3], tangents: &[Vec3], b: Vec3) -> Option<Vec3> {
    let bhat = scale(b, 1.0 / norm(b));
    let mut best = [0.0; 3];
    let mut best_norm = 0.0;
    for t in tangents {
        let c = cross(bhat, *t);
        let n = norm(c);
        if n > best_norm {
            best_norm = n;
            best = c;
        }
    }
    let normal = if best_norm < 1e-10 {
        // straight: pick the coordinate axis least aligned with b
        let axis = (0..3)
            .min_by(|&i, &j| bhat[i].abs().total_cmp(&bhat[j].abs()))
            .unwrap();
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let c = cross(bhat, e);
        scale(c, 1.0 / norm(c))
    } else {
        scale(best, 1.0 / best_norm)
    };
    let scale_len = norm(b).max(1.0);
    let flat = tangents.iter().all(|t| dot(*t, normal).abs() < 1e-10)
        && points
            .iter()
            .all(|p| dot(sub(*p, points[0]), normal).abs() < 1e-10 * scale_len);
    flat.then_some(normal)
}

/// Verdict of the tube admissibility checks at radius `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeAdmissibility {
    pub radius: f64,
    pub max_curvature: f64,
    /// `a * max|gamma| < 1`
    pub local_ok: bool,
    /// smallest distance between grid points whose arclength separation exceeds the threshold
    pub min_distance: f64,
    pub separation_threshold: f64,
    pub global_ok: bool,
}

impl TubeAdmissibility {
    pub fn admissible(&self) -> bool {
        self.local_ok && self.global_ok
    }
}

/// Local (curvature) and global (self-distance) admissibility of the tube of radius `a`.
pub fn check_admissible(curve: &PeriodicCurve, a: f64) -> TubeAdmissibility {
    let max_curvature = curve.max_curvature();
    let local_ok = a * max_curvature < 1.0;
    let m = curve.grid_len();
    let l = curve.length();
    let threshold = (l / 8.0).max(PI * a);
    let b = curve.translation();
    let reach = (threshold / norm(b)).ceil() as i64 + 1;
    let mut min_distance = f64::INFINITY;
    for i in 0..m {
        let si = curve.arclength(i);
        let pi = curve.points[i];
        for k in -reach..=reach {
            let shift = scale(b, k as f64);
            for j in 0..m {
                let sep = (si - curve.arclength(j) - k as f64 * l).abs();
                if sep <= threshold {
                    continue;
                }
                let q = [
                    curve.points[j][0] + shift[0],
                    curve.points[j][1] + shift[1],
                    curve.points[j][2] + shift[2],
                ];
                min_distance = min_distance.min(norm(sub(pi, q)));
            }
        }
    }
    TubeAdmissibility {
        radius: a,
        max_curvature,
        local_ok,
        min_distance,
        separation_threshold: threshold,
        global_ok: min_distance >= 2.0 * a,
    }
}
