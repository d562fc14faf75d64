//! Brillouin grids and band tables, with CSV/JSON serialization.
//!
//! A band table is written as `theta,band,value` CSV rows (17 significant digits,
//! empty value for an absent band) plus a JSON sidecar carrying the metadata and the
//! same values (`null` for absent bands).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Uniform grid of quasimomenta on `[-pi/L, pi/L)` with the compact set
/// `K = { delta <= |theta| <= pi/L - delta }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrillouinGrid {
    pub period: f64,
    pub delta: f64,
    pub thetas: Vec<f64>,
}

impl BrillouinGrid {
    pub fn new(period: f64, points: usize, delta: f64) -> Result<Self> {
        if !(period > 0.0) || points == 0 {
            return Err(Error::InvalidArgument(
                "Brillouin grid needs a positive period and at least one point".into(),
            ));
        }
        if !(delta > 0.0 && delta < PI / (2.0 * period)) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, pi/(2L)) = (0, {}), got {delta}",
                PI / (2.0 * period)
            )));
        }
        let width = 2.0 * PI / period;
        let thetas = (0..points)
            .map(|i| -PI / period + width * i as f64 / points as f64)
            .collect();
        let grid = Self {
            period,
            delta,
            thetas,
        };
        let (neg, pos) = grid.k_counts();
        if neg < 2 || pos < 2 {
            return Err(Error::InvalidArgument(format!(
                "Brillouin grid has {neg}/{pos} points in K per side; need at least 2"
            )));
        }
        Ok(grid)
    }

    /// 41 points with `delta = pi / (8 L)`.
    pub fn standard(period: f64) -> Result<Self> {
        Self::new(period, 41, PI / (8.0 * period))
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn zone_edge(&self) -> f64 {
        PI / self.period
    }

    pub fn in_k(&self, theta: f64) -> bool {
        let t = theta.abs();
        t >= self.delta - 1e-14 && t <= self.zone_edge() - self.delta + 1e-14
    }

    pub fn k_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.in_k(self.thetas[i])).collect()
    }

    fn k_counts(&self) -> (usize, usize) {
        let idx = self.k_indices();
        let neg = idx.iter().filter(|&&i| self.thetas[i] < 0.0).count();
        (neg, idx.len() - neg)
    }

    /// Index of the grid point at `-theta_i`, if present.
    pub fn mirror(&self, i: usize) -> Option<usize> {
        let target = -self.thetas[i];
        let tol = 1e-12 * self.zone_edge();
        self.thetas.iter().position(|t| (t - target).abs() < tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandKind {
    Hill,
    Tube,
    Leaky,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BandMetadata {
    pub curve: String,
    pub dimension: usize,
    /// tube radius `a`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// coupling `alpha`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// longitudinal Fourier truncation `N`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// transverse mode count `J`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse_modes: Option<usize>,
    /// boundary-integral grid size `Q`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_points: Option<usize>,
    /// window index `n0`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_index: Option<usize>,
    /// bands are reported strictly below this energy
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_top: Option<f64>,
    /// `a^-2 kappa_1^2` (tube) or `zeta(alpha)` (leaky)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// `|b|`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation_norm: Option<f64>,
    /// largest eigenvalue shift seen in the convergence refinement
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_shift: Option<f64>,
}

/// Band functions `eps_n(theta_i)`; row `i` holds the bands at `thetas[i]`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandStructure {
    pub schema_version: u32,
    pub kind: BandKind,
    pub grid: BrillouinGrid,
    pub metadata: BandMetadata,
    pub bands: Vec<Vec<Option<f64>>>,
}

impl BandStructure {
    pub fn new(
        kind: BandKind,
        grid: BrillouinGrid,
        metadata: BandMetadata,
        bands: Vec<Vec<Option<f64>>>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            grid,
            metadata,
            bands,
        }
    }

    /// Number of band columns.
    pub fn band_count(&self) -> usize {
        self.bands.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// Band `n` (0-based) at grid point `i`.
    pub fn value(&self, i: usize, n: usize) -> Option<f64> {
        self.bands.get(i).and_then(|r| r.get(n)).copied().flatten()
    }

    /// Present values per grid point.
    pub fn count_at(&self, i: usize) -> usize {
        self.bands[i].iter().filter(|v| v.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,band,value\n");
        let width = self.band_count();
        for (i, &theta) in self.grid.thetas.iter().enumerate() {
            for n in 0..width {
                let value = self.value(i, n).map(fmt17).unwrap_or_default();
                let _ = writeln!(out, "{},{},{}", fmt17(theta), n + 1, value);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Reads back a table from its CSV file and JSON sidecar; the CSV values must agree
    /// with the sidecar.
    pub fn from_csv_and_json(csv: &str, json: &str) -> Result<Self> {
        let table: BandStructure = serde_json::from_str(json)?;
        let mut lines = csv.lines();
        if lines.next() != Some("theta,band,value") {
            return Err(Error::MismatchedTables("CSV header must be theta,band,value".into()));
        }
        let width = table.band_count();
        let mut bands = vec![vec![None; width]; table.grid.len()];
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::MismatchedTables(format!("CSV row {} malformed", k + 2)));
            }
            let i = k / width.max(1);
            let n: usize = cols[1]
                .parse()
                .map_err(|_| Error::MismatchedTables(format!("bad band index in row {}", k + 2)))?;
            let theta: f64 = cols[0]
                .parse()
                .map_err(|_| Error::MismatchedTables(format!("bad theta in row {}", k + 2)))?;
            if i >= table.grid.len() || theta != table.grid.thetas[i] || n == 0 || n > width {
                return Err(Error::MismatchedTables(format!(
                    "CSV row {} does not match the sidecar grid",
                    k + 2
                )));
            }
            bands[i][n - 1] = if cols[2].is_empty() {
                None
            } else {
                Some(cols[2].parse().map_err(|_| {
                    Error::MismatchedTables(format!("bad value in row {}", k + 2))
                })?)
            };
        }
        let normalized: Vec<Vec<Option<f64>>> = table
            .bands
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.resize(width, None);
                r
            })
            .collect();
        if bands != normalized {
            return Err(Error::MismatchedTables(
                "CSV values differ from the JSON sidecar".into(),
            ));
        }
        Ok(table)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&csv, self.to_csv())?;
        std::fs::write(&json, self.to_json()?)?;
        Ok((csv, json))
    }

    pub fn read(csv: &Path, json: &Path) -> Result<Self> {
        Self::from_csv_and_json(&std::fs::read_to_string(csv)?, &std::fs::read_to_string(json)?)
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
