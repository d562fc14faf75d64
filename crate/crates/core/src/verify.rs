//! Numerical certificates built from band tables: thin-tube slope, band oscillation on `K`,
//! eigenvalue count in the window, strong-coupling decay and small-curvature approach.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bands::{BandKind, BandStructure, SCHEMA_VERSION};
use crate::error::{Error, Result};

pub const SLOPE_MIN: f64 = 0.9;
pub const RESIDUAL_MAX: f64 = 0.15;
/// Margin applied to strict comparisons, matching the solver tolerance.
pub const MARGIN: f64 = 1e-6;
/// A residual counts as resolved only when it exceeds this multiple of the table's
/// refinement shift.
pub const RESOLUTION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Slope,
    Oscillation,
    Count,
    StrongCoupling,
    SmallCurvature,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Slope => "slope",
            Self::Oscillation => "oscillation",
            Self::Count => "count",
            Self::StrongCoupling => "strong-coupling",
            Self::SmallCurvature => "small-curvature",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRef {
    pub label: String,
    pub sha256: String,
}

impl InputRef {
    /// Hash of the table's CSV rendering followed by its JSON sidecar.
    pub fn table(label: impl Into<String>, table: &BandStructure) -> Result<Self> {
        let mut h = Sha256::new();
        h.update(table.to_csv().as_bytes());
        h.update(table.to_json()?.as_bytes());
        Ok(Self {
            label: label.into(),
            sha256: hex::encode(h.finalize()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: u32,
    pub kind: CertificateKind,
    pub inputs: Vec<InputRef>,
    pub numbers: BTreeMap<String, Value>,
    pub thresholds: BTreeMap<String, f64>,
    pub pass: bool,
    pub summary: String,
}

impl Certificate {
    fn new(kind: CertificateKind, inputs: Vec<InputRef>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            inputs,
            numbers: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            pass: false,
            summary: String::new(),
        }
    }

    fn number(&mut self, key: &str, v: impl Serialize) {
        self.numbers
            .insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn finish(mut self, pass: bool, summary: String) -> Self {
        self.pass = pass;
        self.summary = summary;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One-line human-readable verdict.
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.kind,
            self.summary
        )
    }
}

/// A band table with the label used for provenance.
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub label: &'a str,
    pub table: &'a BandStructure,
}

impl<'a> Labeled<'a> {
    pub fn new(label: &'a str, table: &'a BandStructure) -> Self {
        Self { label, table }
    }
}

fn inputs(tables: &[Labeled<'_>]) -> Result<Vec<InputRef>> {
    tables.iter().map(|t| InputRef::table(t.label, t.table)).collect()
}

fn same_grid(a: &BandStructure, b: &BandStructure) -> Result<()> {
    let ok = a.grid.len() == b.grid.len()
        && a.grid
            .thetas
            .iter()
            .zip(&b.grid.thetas)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * a.grid.zone_edge());
    if ok {
        Ok(())
    } else {
        Err(Error::MismatchedTables("band tables use different Brillouin grids".into()))
    }
}

/// Grids with the same number of points whose zones differ only by scale; point `i` of one
/// corresponds to point `i` of the other.
fn scaled_grid(a: &BandStructure, b: &BandStructure) -> Result<()> {
    let ratio = a.grid.period / b.grid.period;
    let ok = a.grid.len() == b.grid.len()
        && (a.grid.delta * ratio - b.grid.delta).abs() <= 1e-12 * b.grid.delta
        && a.grid
            .thetas
            .iter()
            .zip(&b.grid.thetas)
            .all(|(x, y)| (x * ratio - y).abs() <= 1e-12 * b.grid.zone_edge());
    if ok {
        Ok(())
    } else {
        Err(Error::MismatchedTables(
            "band tables use Brillouin grids that are not rescalings of each other".into(),
        ))
    }
}

fn geometric(values: &[f64], what: &str) -> Result<()> {
    let ok = values.len() >= 2
        && values.iter().all(|v| *v > 0.0)
        && values
            .windows(3)
            .all(|w| ((w[1] / w[0]) - (w[2] / w[1])).abs() <= 1e-9 * (w[1] / w[0]).abs());
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must form a geometric progression")))
    }
}

fn band_value(t: &BandStructure, i: usize, n: usize) -> Result<f64> {
    t.value(i, n - 1).ok_or_else(|| {
        Error::MismatchedTables(format!(
            "band {n} missing at theta = {}",
            t.grid.thetas[i]
        ))
    })
}

fn k_indices(t: &BandStructure) -> Result<Vec<usize>> {
    let k = t.grid.k_indices();
    if k.is_empty() {
        return Err(Error::InvalidArgument("the compact set K contains no grid point".into()));
    }
    Ok(k)
}

/// Least-squares line `y = c + p x`; returns `(p, c, residuals, slope standard error)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (c + p * a)).collect();
    let se = if x.len() > 2 {
        (res.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (p, c, res, se)
}

/// Summary of a slope certificate needed by the oscillation floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    /// `max_a Delta(a) / a`
    pub constant: f64,
}

/// Thin-tube residual `Delta(a) = max_K |eps_{1,n}(a) - a^-2 kappa_1^2 - lambda_n|` over an
/// `a`-sweep, with a log-log fit.
pub fn slope_certificate(
    tubes: &[Labeled<'_>],
    hill: Labeled<'_>,
    band: usize,
) -> Result<(Certificate, SlopeFit)> {
    if tubes.len() < 4 {
        return Err(Error::InvalidArgument("slope fits need at least 4 radii".into()));
    }
    let radii: Vec<f64> = tubes
        .iter()
        .map(|t| {
            t.table.metadata.radius.ok_or_else(|| {
                Error::MismatchedTables(format!("{} carries no tube radius", t.label))
            })
        })
        .collect::<Result<_>>()?;
    geometric(&radii, "tube radii")?;
    let k = k_indices(hill.table)?;
    let mut deltas = Vec::new();
    let mut noise = 0.0f64;
    let mut scale = 0.0f64;
    for t in tubes {
        same_grid(t.table, hill.table)?;
        if t.table.kind != BandKind::Tube {
            return Err(Error::MismatchedTables(format!("{} is not a tube table", t.label)));
        }
        let thr = t.table.metadata.threshold.ok_or_else(|| {
            Error::MismatchedTables(format!("{} carries no transverse threshold", t.label))
        })?;
        scale = scale.max(thr);
        noise = noise.max(t.table.metadata.refinement_shift.unwrap_or(0.0));
        let mut d = 0.0f64;
        for &i in &k {
            d = d.max((band_value(t.table, i, band)? - thr - band_value(hill.table, i, band)?).abs());
        }
        deltas.push(d);
    }
    let mut all = tubes.to_vec();
    all.push(hill);
    let mut cert = Certificate::new(CertificateKind::Slope, inputs(&all)?);
    cert.number("band", band);
    cert.number("radii", &radii);
    cert.number("deltas", &deltas);
    cert.number("noise_floor", noise);
    cert.thresholds.insert("slope_min".into(), SLOPE_MIN);
    cert.thresholds.insert("residual_max".into(), RESIDUAL_MAX);
    let constant = radii
        .iter()
        .zip(&deltas)
        .map(|(a, d)| d / a)
        .fold(0.0, f64::max);
    cert.number("c_estimate", constant);

    if deltas.iter().all(|d| *d <= 1e-10 * scale.max(1.0)) {
        cert.number("exact", true);
        let fit = SlopeFit {
            slope: f64::INFINITY,
            constant,
        };
        let summary = format!(
            "residual vanishes to solver precision (max {:.3e}) for all radii",
            deltas.iter().cloned().fold(0.0, f64::max)
        );
        return Ok((cert.finish(true, summary), fit));
    }
    cert.number("exact", false);
    let unresolved: Vec<f64> = radii
        .iter()
        .zip(&deltas)
        .filter(|(_, d)| **d <= RESOLUTION_FACTOR * noise || **d == 0.0)
        .map(|(a, _)| *a)
        .collect();
    cert.number("unresolved_radii", &unresolved);
    let x: Vec<f64> = radii.iter().map(|a| a.ln()).collect();
    let y: Vec<f64> = deltas.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, intercept, res, se) = fit_line(&x, &y);
    let worst = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
    cert.number("slope", slope);
    cert.number("slope_interval", [slope - 2.0 * se, slope + 2.0 * se]);
    cert.number("intercept", intercept);
    cert.number("residuals", &res);
    let pass = slope >= SLOPE_MIN && worst < RESIDUAL_MAX && unresolved.is_empty();
    let summary = format!(
        "slope {slope:.4} (>= {SLOPE_MIN}), max residual {worst:.4} (< {RESIDUAL_MAX}), c ~ {constant:.3e}{}",
        if unresolved.is_empty() { "" } else { ", some radii below the noise floor" }
    );
    Ok((cert.finish(pass, summary), SlopeFit { slope, constant }))
}

/// Oscillation floor: a fixed number, or `osc_K lambda_n - 2 c a` from the comparison table.
#[derive(Debug, Clone, Copy)]
pub enum OscillationFloor<'a> {
    Fixed(f64),
    Perturbative {
        hill: Labeled<'a>,
        constant: f64,
        radius: f64,
    },
}

fn oscillation(t: &BandStructure, k: &[usize], band: usize) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in k {
        let v = band_value(t, i, band)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// `osc_K eps_n = max_K eps_n - min_K eps_n` must exceed the floor for every listed band.
pub fn oscillation_certificate(
    table: Labeled<'_>,
    bands: &[usize],
    floor: OscillationFloor<'_>,
) -> Result<Certificate> {
    let k = k_indices(table.table)?;
    let mut tables = vec![table];
    if let OscillationFloor::Perturbative { hill, .. } = floor {
        same_grid(table.table, hill.table)?;
        tables.push(hill);
    }
    let mut cert = Certificate::new(CertificateKind::Oscillation, inputs(&tables)?);
    let mut oscs = Vec::new();
    let mut floors = Vec::new();
    for &n in bands {
        oscs.push(oscillation(table.table, &k, n)?);
        floors.push(match floor {
            OscillationFloor::Fixed(f) => f,
            OscillationFloor::Perturbative {
                hill,
                constant,
                radius,
            } => oscillation(hill.table, &k, n)? - 2.0 * constant * radius,
        });
    }
    cert.number("bands", bands);
    cert.number("oscillations", &oscs);
    cert.number("floors", &floors);
    cert.thresholds.insert("margin".into(), MARGIN);
    let pass = !bands.is_empty()
        && oscs
            .iter()
            .zip(&floors)
            .all(|(o, f)| *f >= 0.0 && *o > f + MARGIN);
    let summary = oscs
        .iter()
        .zip(&floors)
        .zip(bands)
        .map(|((o, f), n)| format!("band {n}: osc {o:.6e} vs floor {f:.6e}"))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(cert.finish(pass, summary))
}

/// Exactly `n0` simple eigenvalues below the window at every `theta` in `K`. Over a sweep,
/// the verdict is taken at the smallest radius and the onset radius is reported.
pub fn count_certificate(tubes: &[Labeled<'_>], n0: usize) -> Result<Certificate> {
    if tubes.is_empty() {
        return Err(Error::InvalidArgument("count certificate needs a tube table".into()));
    }
    let mut cert = Certificate::new(CertificateKind::Count, inputs(tubes)?);
    let mut per_radius = Vec::new();
    let mut verdicts = Vec::new();
    for t in tubes {
        let md = &t.table.metadata;
        let a = md.radius.ok_or_else(|| {
            Error::MismatchedTables(format!("{} carries no tube radius", t.label))
        })?;
        if md.window_index != Some(n0) || md.window_top.is_none() {
            return Err(Error::MismatchedTables(format!(
                "{} was not computed with window index {n0}",
                t.label
            )));
        }
        let k = k_indices(t.table)?;
        let mut offending = Vec::new();
        let mut counts = Vec::new();
        let mut min_gap = f64::INFINITY;
        for &i in &k {
            let vals: Vec<f64> = t.table.bands[i].iter().flatten().copied().collect();
            for w in vals.windows(2) {
                min_gap = min_gap.min(w[1] - w[0]);
            }
            counts.push(vals.len());
            let simple = vals.windows(2).all(|w| w[1] - w[0] > MARGIN);
            if vals.len() != n0 || !simple {
                offending.push(t.table.grid.thetas[i]);
            }
        }
        verdicts.push((a, offending.is_empty()));
        per_radius.push(json!({
            "radius": a,
            "counts": counts,
            "min_gap": if min_gap.is_finite() { json!(min_gap) } else { Value::Null },
            "offending_thetas": offending,
        }));
    }
    let onset = verdicts
        .iter()
        .filter(|(_, ok)| *ok)
        .map(|(a, _)| *a)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    let smallest = verdicts
        .iter()
        .cloned()
        .fold((f64::INFINITY, false), |m, v| if v.0 < m.0 { v } else { m });
    cert.number("window_index", n0);
    cert.number("per_radius", &per_radius);
    cert.number("onset_radius", onset);
    let counts_seen: Vec<usize> = per_radius
        .iter()
        .flat_map(|p| p["counts"].as_array().cloned().unwrap_or_default())
        .filter_map(|c| c.as_u64().map(|c| c as usize))
        .collect();
    let lo = counts_seen.iter().min().copied().unwrap_or(0);
    let hi = counts_seen.iter().max().copied().unwrap_or(0);
    let summary = format!(
        "expected {n0} simple eigenvalues on K at a = {}; found between {lo} and {hi}",
        smallest.0
    );
    Ok(cert.finish(smallest.1, summary))
}

/// `r(alpha) = max_K |eps_1(alpha) - zeta(alpha) - lambda_1|` must decrease strictly along
/// the sweep. Point `i` of the leaky grid is compared with point `i` of the comparison grid.
pub fn strong_coupling_certificate(
    leaky: &[Labeled<'_>],
    hill: Labeled<'_>,
) -> Result<Certificate> {
    if leaky.len() < 3 {
        return Err(Error::InvalidArgument("strong-coupling sweeps need at least 3 couplings".into()));
    }
    let alphas: Vec<f64> = leaky
        .iter()
        .map(|t| {
            t.table.metadata.coupling.ok_or_else(|| {
                Error::MismatchedTables(format!("{} carries no coupling", t.label))
            })
        })
        .collect::<Result<_>>()?;
    geometric(&alphas, "couplings")?;
    let k = k_indices(hill.table)?;
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut rs = Vec::new();
    for (t, &alpha) in leaky.iter().zip(&alphas) {
        scaled_grid(t.table, hill.table)?;
        let z = t.table.metadata.threshold.ok_or_else(|| {
            Error::MismatchedTables(format!("{} carries no threshold", t.label))
        })?;
        if k.iter().any(|&i| t.table.value(i, 0).is_none()) {
            skipped.push(alpha);
            continue;
        }
        let mut r = 0.0f64;
        for &i in &k {
            r = r.max((band_value(t.table, i, 1)? - z - band_value(hill.table, i, 1)?).abs());
        }
        used.push(alpha);
        rs.push(r);
    }
    let mut all = leaky.to_vec();
    all.push(hill);
    let mut cert = Certificate::new(CertificateKind::StrongCoupling, inputs(&all)?);
    cert.number("couplings", &used);
    cert.number("couplings_without_band", &skipped);
    cert.number("residuals", &rs);
    cert.thresholds.insert("margin".into(), MARGIN);
    if used.len() >= 2 {
        let x: Vec<f64> = used.iter().map(|a| a.ln()).collect();
        let y: Vec<f64> = rs.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
        cert.number("decay_exponent", fit_line(&x, &y).0);
        let y2: Vec<f64> = used
            .iter()
            .zip(&rs)
            .map(|(a, r)| (r * a / a.ln()).max(f64::MIN_POSITIVE).ln())
            .collect();
        cert.number("log_corrected_exponent", fit_line(&x, &y2).0);
    }
    let pass = used.len() >= 3 && rs.windows(2).all(|w| w[1] < w[0] - MARGIN);
    let summary = format!(
        "r = [{}] over alpha = {:?}{}",
        rs.iter().map(|r| format!("{r:.4e}")).collect::<Vec<_>>().join(", "),
        used,
        if skipped.is_empty() {
            String::new()
        } else {
            format!(", band 1 absent on K for alpha = {skipped:?}")
        }
    );
    Ok(cert.finish(pass, summary))
}

/// Curved tubes at amplitudes `t` against straight tubes of the same period length: the
/// largest band deviation must fall strictly as `t` decreases and the bottom band must keep
/// a positive oscillation on `K`.
pub fn small_curvature_certificate(
    family: &[(f64, Labeled<'_>, Labeled<'_>)],
) -> Result<Certificate> {
    if family.len() < 2 {
        return Err(Error::InvalidArgument("small-curvature sweeps need at least 2 amplitudes".into()));
    }
    let mut ordered = family.to_vec();
    ordered.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut deviations = Vec::new();
    let mut oscs = Vec::new();
    let mut tables = Vec::new();
    for (_, curved, straight) in &ordered {
        same_grid(curved.table, straight.table)?;
        let k = k_indices(curved.table)?;
        let mut dev = 0.0f64;
        for i in 0..curved.table.grid.len() {
            let n = curved.table.count_at(i).min(straight.table.count_at(i));
            for b in 0..n {
                dev = dev.max((curved.table.bands[i][b].unwrap_or(f64::NAN)
                    - straight.table.bands[i][b].unwrap_or(f64::NAN))
                .abs());
            }
        }
        deviations.push(dev);
        oscs.push(oscillation(curved.table, &k, 1)?);
        tables.push(*curved);
        tables.push(*straight);
    }
    let mut cert = Certificate::new(CertificateKind::SmallCurvature, inputs(&tables)?);
    let amps: Vec<f64> = ordered.iter().map(|f| f.0).collect();
    cert.number("amplitudes", &amps);
    cert.number("deviations", &deviations);
    cert.number("bottom_oscillations", &oscs);
    cert.thresholds.insert("margin".into(), MARGIN);
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0] - MARGIN || w[1] == 0.0 && w[0] == 0.0);
    let positive = oscs.iter().all(|o| *o > MARGIN);
    let summary = format!(
        "deviation [{}] at t = {:?}; min bottom-band oscillation {:.4e}",
        deviations.iter().map(|d| format!("{d:.4e}")).collect::<Vec<_>>().join(", "),
        amps,
        oscs.iter().cloned().fold(f64::INFINITY, f64::min)
    );
    Ok(cert.finish(decreasing && positive && deviations.iter().all(|d| d.is_finite()), summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{BandMetadata, BrillouinGrid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn table(kind: BandKind, f: impl Fn(f64) -> Vec<f64>, md: BandMetadata) -> BandStructure {
        let grid = BrillouinGrid::standard(2.0 * PI).unwrap();
        let bands = grid
            .thetas
            .iter()
            .map(|&t| f(t).into_iter().map(Some).collect())
            .collect();
        BandStructure::new(kind, grid, md, bands)
    }

    fn hill() -> BandStructure {
        table(BandKind::Hill, |t| vec![t * t, (t.abs() - 1.0).powi(2)], BandMetadata::default())
    }

    fn tube(a: f64, c: f64, power: i32) -> BandStructure {
        let thr = (PI / 2.0 / a).powi(2);
        table(
            BandKind::Tube,
            move |t| vec![thr + t * t + c * a.powi(power) * (1.0 + t), thr + (t.abs() - 1.0).powi(2)],
            BandMetadata {
                radius: Some(a),
                threshold: Some(thr),
                window_index: Some(2),
                window_top: Some(thr + (3.0f64 / 2.0).powi(2)),
                ..Default::default()
            },
        )
    }

    #[test]
    fn line_fit_is_exact_on_lines() {
        let (p, c, r, se) = fit_line(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]);
        assert!((p - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
        assert!(r.iter().all(|v| v.abs() < 1e-14) && se < 1e-14);
    }

    #[test]
    fn slope_passes_for_linear_residual_and_fails_when_corrupted() {
        let h = hill();
        let tubes: Vec<BandStructure> = [0.2, 0.1, 0.05, 0.025].iter().map(|&a| tube(a, 0.3, 1)).collect();
        let labeled: Vec<Labeled> = tubes.iter().map(|t| Labeled::new("tube", t)).collect();
        let (cert, fit) = slope_certificate(&labeled, Labeled::new("hill", &h), 1).unwrap();
        assert!(cert.pass, "{}", cert.line());
        assert!((fit.slope - 1.0).abs() < 0.05);

        let other = table(BandKind::Hill, |t| vec![t * t + 0.1 * t.cos(), 1.0], BandMetadata::default());
        let (bad, _) = slope_certificate(&labeled, Labeled::new("other", &other), 1).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn slope_flags_exact_separation() {
        let h = hill();
        let tubes: Vec<BandStructure> = [0.2, 0.1, 0.05, 0.025].iter().map(|&a| tube(a, 0.0, 1)).collect();
        let labeled: Vec<Labeled> = tubes.iter().map(|t| Labeled::new("tube", t)).collect();
        let (cert, _) = slope_certificate(&labeled, Labeled::new("hill", &h), 1).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.numbers["exact"], json!(true));
    }

    #[test]
    fn slope_needs_geometric_sweep() {
        let h = hill();
        let tubes: Vec<BandStructure> = [0.2, 0.1, 0.07, 0.025].iter().map(|&a| tube(a, 0.3, 1)).collect();
        let labeled: Vec<Labeled> = tubes.iter().map(|t| Labeled::new("tube", t)).collect();
        assert!(slope_certificate(&labeled, Labeled::new("hill", &h), 1).is_err());
    }

    #[test]
    fn oscillation_of_free_band_and_constant_control() {
        let h = hill();
        let cert = oscillation_certificate(Labeled::new("hill", &h), &[1], OscillationFloor::Fixed(0.0)).unwrap();
        let k = h.grid.k_indices();
        let vals: Vec<f64> = k.iter().map(|&i| h.grid.thetas[i].powi(2)).collect();
        let exact = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(cert.pass);
        assert_eq!(cert.numbers["oscillations"], json!([exact]));
        let flat = table(BandKind::Tube, |_| vec![1.0], BandMetadata::default());
        let bad = oscillation_certificate(Labeled::new("flat", &flat), &[1], OscillationFloor::Fixed(0.0)).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn count_reports_offenders() {
        let t = tube(0.05, 0.0, 1);
        let cert = count_certificate(&[Labeled::new("t", &t)], 2).unwrap();
        assert!(cert.pass, "{}", cert.line());
        let cert3 = count_certificate(&[Labeled::new("t", &t)], 3);
        assert!(cert3.is_err());
    }

    #[test]
    fn strong_coupling_negative_control() {
        let h = hill();
        let mk = |alpha: f64, sign: f64| {
            table(
                BandKind::Leaky,
                move |t| vec![-alpha * alpha / 4.0 + t * t + alpha.ln() / alpha],
                BandMetadata {
                    coupling: Some(alpha),
                    threshold: Some(sign * alpha * alpha / 4.0),
                    ..Default::default()
                },
            )
        };
        let good: Vec<BandStructure> = [5.0, 10.0, 20.0, 40.0].iter().map(|&a| mk(a, -1.0)).collect();
        let l: Vec<Labeled> = good.iter().map(|t| Labeled::new("l", t)).collect();
        assert!(strong_coupling_certificate(&l, Labeled::new("h", &h)).unwrap().pass);
        let bad: Vec<BandStructure> = [5.0, 10.0, 20.0, 40.0].iter().map(|&a| mk(a, 1.0)).collect();
        let l: Vec<Labeled> = bad.iter().map(|t| Labeled::new("l", t)).collect();
        assert!(!strong_coupling_certificate(&l, Labeled::new("h", &h)).unwrap().pass);
    }

    #[test]
    fn certificates_are_reproducible() {
        let h = hill();
        let a = oscillation_certificate(Labeled::new("h", &h), &[1, 2], OscillationFloor::Fixed(0.0)).unwrap();
        let b = oscillation_certificate(Labeled::new("h", &h), &[1, 2], OscillationFloor::Fixed(0.0)).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.inputs[0].sha256.len(), 64);
    }

    proptest! {
        #[test]
        fn power_laws_are_recovered(c in 1e-4f64..10.0, p in 0.5f64..3.0, x0 in -3.0f64..0.0) {
            let x: Vec<f64> = (0..5).map(|i| x0 - 0.7 * i as f64).collect();
            let y: Vec<f64> = x.iter().map(|v| c.ln() + p * v).collect();
            let (slope, intercept, res, _) = fit_line(&x, &y);
            prop_assert!((slope - p).abs() < 1e-9);
            prop_assert!((intercept - c.ln()).abs() < 1e-8);
            prop_assert!(res.iter().all(|r| r.abs() < 1e-9));
        }

        #[test]
        fn oscillation_is_nonnegative_and_shift_invariant(shift in -50.0f64..50.0, amp in 0.0f64..3.0) {
            let base = table(BandKind::Hill, move |t| vec![amp * t.cos()], BandMetadata::default());
            let moved = table(BandKind::Hill, move |t| vec![amp * t.cos() + shift], BandMetadata::default());
            let k = base.grid.k_indices();
            let a = oscillation(&base, &k, 1).unwrap();
            let b = oscillation(&moved, &k, 1).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + shift.abs()));
        }
    }
}
