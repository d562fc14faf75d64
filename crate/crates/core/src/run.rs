//! JSON run configurations: curve, Brillouin grid and a list of band and certificate tasks.
//! Everything is validated before any computation, computed in memory, then written once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bands::{BandStructure, BrillouinGrid, SCHEMA_VERSION};
use crate::curvegeom::{build_curve, CurveSpec, PeriodicCurve};
use crate::error::{Error, Result};
use crate::hill::{hill_bands, DEFAULT_TRUNCATION as HILL_TRUNCATION};
use crate::leaky2d::{leaky_bands, LeakyConfig, DEFAULT_BANDS, DEFAULT_BOUNDARY_POINTS, DEFAULT_THRESHOLD_MARGIN};
use crate::tubefibre::{tube_bands, TubeConfig, DEFAULT_TRANSVERSE_MODES, DEFAULT_TRUNCATION as TUBE_TRUNCATION};
use crate::verify::{
    count_certificate, oscillation_certificate, slope_certificate, small_curvature_certificate,
    strong_coupling_certificate, Certificate, Labeled, OscillationFloor,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_CERTIFICATE: i32 = 5;
pub const EXIT_IO: i32 = 1;

pub const DEFAULT_CURVE_POINTS: usize = 512;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Inadmissible(_)
        | Error::PeriodCell(_)
        | Error::NonPeriodic(_)
        | Error::DegenerateParametrization { .. }
        | Error::InsufficientSmoothness { .. }
        | Error::AboveThreshold { .. }
        | Error::EmptyWindow { .. } => EXIT_ASSUMPTION,
        Error::Aliasing { .. }
        | Error::QuadratureUnderresolved { .. }
        | Error::Convergence { .. }
        | Error::BesselZero { .. } => EXIT_CONVERGENCE,
        Error::MismatchedTables(_) => EXIT_CERTIFICATE,
        Error::Io(_) => EXIT_IO,
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_curve_points() -> usize {
    DEFAULT_CURVE_POINTS
}
fn default_grid_points() -> usize {
    41
}
fn default_delta_fraction() -> f64 {
    0.125
}
fn default_hill_truncation() -> usize {
    HILL_TRUNCATION
}
fn default_hill_bands() -> usize {
    4
}
fn default_tube_truncation() -> usize {
    TUBE_TRUNCATION
}
fn default_modes() -> usize {
    DEFAULT_TRANSVERSE_MODES
}
fn default_window() -> usize {
    1
}
fn default_points() -> usize {
    DEFAULT_BOUNDARY_POINTS
}
fn default_leaky_bands() -> usize {
    DEFAULT_BANDS
}
fn default_margin() -> f64 {
    DEFAULT_THRESHOLD_MARGIN
}
fn default_band() -> usize {
    1
}
fn default_bands_list() -> Vec<usize> {
    vec![1]
}

/// Brillouin grid: `points` quasimomenta on `[-pi/P, pi/P]` and `K` at distance
/// `delta_fraction * pi / P` from the zone edges, `P` being the period of the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_points")]
    pub points: usize,
    #[serde(default = "default_delta_fraction")]
    pub delta_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: default_grid_points(),
            delta_fraction: default_delta_fraction(),
        }
    }
}

impl GridConfig {
    pub fn build(&self, period: f64) -> Result<BrillouinGrid> {
        BrillouinGrid::new(period, self.points, self.delta_fraction * std::f64::consts::PI / period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", deny_unknown_fields)]
pub enum Task {
    #[serde(rename = "hill-bands")]
    HillBands {
        #[serde(default = "default_hill_truncation")]
        truncation: usize,
        #[serde(default = "default_hill_bands")]
        bands: usize,
    },
    #[serde(rename = "tube-bands")]
    TubeBands {
        radii: Vec<f64>,
        #[serde(default = "default_tube_truncation")]
        truncation: usize,
        #[serde(default = "default_modes")]
        transverse_modes: usize,
        #[serde(default = "default_window")]
        window_index: usize,
    },
    #[serde(rename = "leaky-bands")]
    LeakyBands {
        couplings: Vec<f64>,
        #[serde(default = "default_points")]
        boundary_points: usize,
        #[serde(default = "default_leaky_bands")]
        bands: usize,
        #[serde(default = "default_margin")]
        threshold_margin: f64,
    },
    /// Uses the tube-bands sweep and the hill-bands table.
    #[serde(rename = "verify:slope")]
    Slope {
        #[serde(default = "default_band")]
        band: usize,
    },
    /// Oscillation of one table: the tube table of `radius`, or the hill table. Without a
    /// fixed `floor` the floor is `osc lambda_n - 2 c a` from the slope fit.
    #[serde(rename = "verify:oscillation")]
    Oscillation {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_bands_list")]
        bands: Vec<usize>,
        #[serde(default)]
        floor: Option<f64>,
    },
    /// Uses the tube-bands sweep and its window index.
    #[serde(rename = "verify:count")]
    Count,
    /// Uses the leaky-bands sweep and the hill-bands table.
    #[serde(rename = "verify:strong-coupling")]
    StrongCoupling,
    /// Computes its own tube tables for the amplitude-scaled curves and for straight
    /// tubes of the same period length.
    #[serde(rename = "verify:small-curvature")]
    SmallCurvature {
        radius: f64,
        amplitudes: Vec<f64>,
        #[serde(default = "default_tube_truncation")]
        truncation: usize,
        #[serde(default = "default_modes")]
        transverse_modes: usize,
        #[serde(default = "default_window")]
        window_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub curve: CurveSpec,
    /// Samples per period used to build the curve.
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    #[serde(default)]
    pub grid: GridConfig,
    pub tasks: Vec<Task>,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Worker threads, overridden by `--workers`.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_geometric(values: &[f64], min: usize, what: &str) -> Result<()> {
    if values.len() < min {
        return Err(config_error(format!("{what} needs at least {min} values")));
    }
    let r0 = values[1] / values[0];
    if values
        .windows(2)
        .any(|w| ((w[1] / w[0]) - r0).abs() > 1e-9 * r0.abs())
    {
        return Err(config_error(format!("{what} must form a geometric progression")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn hill_task(&self) -> Option<(usize, usize)> {
        self.tasks.iter().find_map(|t| match t {
            Task::HillBands { truncation, bands } => Some((*truncation, *bands)),
            _ => None,
        })
    }

    fn tube_radii(&self) -> Option<&[f64]> {
        self.tasks.iter().find_map(|t| match t {
            Task::TubeBands { radii, .. } => Some(radii.as_slice()),
            _ => None,
        })
    }

    fn leaky_couplings(&self) -> Option<&[f64]> {
        self.tasks.iter().find_map(|t| match t {
            Task::LeakyBands { couplings, .. } => Some(couplings.as_slice()),
            _ => None,
        })
    }

    /// Full schema and consistency check; no curve is built.
    pub fn validate(&self) -> Result<()> {
        let fail = |e: Error| config_error(e.to_string());
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        self.curve.validate().map_err(fail)?;
        if self.curve_points < 32 {
            return Err(config_error("curve_points must be at least 32"));
        }
        if !(self.grid.delta_fraction > 0.0 && self.grid.delta_fraction < 0.5) {
            return Err(config_error("grid.delta_fraction must lie in (0, 1/2)"));
        }
        self.grid.build(1.0).map_err(fail)?;
        if matches!(self.workers, Some(0)) {
            return Err(config_error("workers must be at least 1"));
        }
        if self.tasks.is_empty() {
            return Err(config_error("no tasks"));
        }
        let mut kinds = std::collections::BTreeSet::new();
        for t in &self.tasks {
            let name = serde_json::to_value(t)?["task"].as_str().unwrap_or("").to_string();
            if !kinds.insert(name.clone()) {
                return Err(config_error(format!("task {name} appears twice")));
            }
        }
        for t in &self.tasks {
            match t {
                Task::HillBands { truncation, bands } => {
                    if *truncation < 2 || *bands == 0 || *bands > 2 * truncation - 2 {
                        return Err(config_error("hill-bands needs 1 <= bands <= 2 truncation - 2"));
                    }
                }
                Task::TubeBands {
                    radii,
                    truncation,
                    transverse_modes,
                    window_index,
                } => {
                    if radii.is_empty() {
                        return Err(config_error("tube-bands needs at least one radius"));
                    }
                    for &a in radii {
                        tube_config(a, *truncation, *transverse_modes, *window_index)
                            .validate()
                            .map_err(fail)?;
                    }
                }
                Task::LeakyBands {
                    couplings,
                    boundary_points,
                    bands,
                    threshold_margin,
                } => {
                    if self.curve.dimension != 2 {
                        return Err(config_error("leaky-bands supports planar curves only"));
                    }
                    if couplings.is_empty() {
                        return Err(config_error("leaky-bands needs at least one coupling"));
                    }
                    for &alpha in couplings {
                        leaky_config(alpha, *boundary_points, *bands, *threshold_margin)
                            .validate()
                            .map_err(fail)?;
                    }
                }
                Task::Slope { band } => {
                    let radii = self
                        .tube_radii()
                        .ok_or_else(|| config_error("verify:slope needs a tube-bands task"))?;
                    check_geometric(radii, 4, "tube radii")?;
                    let (_, n) = self
                        .hill_task()
                        .ok_or_else(|| config_error("verify:slope needs a hill-bands task"))?;
                    if *band == 0 || *band > n {
                        return Err(config_error("verify:slope band outside the hill table"));
                    }
                }
                Task::Oscillation { radius, bands, floor } => {
                    if bands.is_empty() || bands.contains(&0) {
                        return Err(config_error("verify:oscillation needs band indices >= 1"));
                    }
                    if let Some(a) = radius {
                        let radii = self.tube_radii().unwrap_or(&[]);
                        if !radii.contains(a) {
                            return Err(config_error(format!(
                                "verify:oscillation radius {a} is not in the tube-bands sweep"
                            )));
                        }
                    } else if self.hill_task().is_none() {
                        return Err(config_error("verify:oscillation needs a hill-bands task"));
                    }
                    match floor {
                        Some(f) if !f.is_finite() => {
                            return Err(config_error("verify:oscillation floor must be finite"))
                        }
                        None => {
                            if radius.is_none() || self.hill_task().is_none() {
                                return Err(config_error(
                                    "a perturbative floor needs a tube radius and a hill-bands task",
                                ));
                            }
                            check_geometric(self.tube_radii().unwrap_or(&[]), 4, "tube radii")?;
                        }
                        _ => {}
                    }
                }
                Task::Count => {
                    if self.tube_radii().is_none() {
                        return Err(config_error("verify:count needs a tube-bands task"));
                    }
                }
                Task::StrongCoupling => {
                    let c = self
                        .leaky_couplings()
                        .ok_or_else(|| config_error("verify:strong-coupling needs a leaky-bands task"))?;
                    check_geometric(c, 3, "couplings")?;
                    if self.hill_task().is_none() {
                        return Err(config_error("verify:strong-coupling needs a hill-bands task"));
                    }
                }
                Task::SmallCurvature {
                    radius,
                    amplitudes,
                    truncation,
                    transverse_modes,
                    window_index,
                } => {
                    tube_config(*radius, *truncation, *transverse_modes, *window_index)
                        .validate()
                        .map_err(fail)?;
                    if amplitudes.len() < 2 || amplitudes.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                        return Err(config_error(
                            "verify:small-curvature needs at least 2 amplitudes in (0, 1]",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn digest(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.workers = None;
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&canonical)?)))
    }
}

fn tube_config(a: f64, n: usize, j: usize, n0: usize) -> TubeConfig {
    TubeConfig::new(a).with_truncation(n, j).with_window(n0)
}

fn leaky_config(alpha: f64, q: usize, bands: usize, margin: f64) -> LeakyConfig {
    let mut c = LeakyConfig::new(alpha).with_points(q).with_bands(bands);
    c.threshold_margin = margin;
    c
}

/// Everything a run produces, held in memory until written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub tables: Vec<(String, BandStructure)>,
    pub certificates: Vec<Certificate>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    pub fn table(&self, stem: &str) -> Option<&BandStructure> {
        self.tables.iter().find(|(s, _)| s == stem).map(|(_, t)| t)
    }

    /// File names and contents, including the plot script and the manifest.
    pub fn files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut files = Vec::new();
        for (stem, t) in &self.tables {
            files.push((format!("{stem}.csv"), t.to_csv().into_bytes()));
            files.push((format!("{stem}.json"), t.to_json()?.into_bytes()));
        }
        for c in &self.certificates {
            files.push((format!("certificate-{}.json", c.kind), c.to_json()?.into_bytes()));
        }
        if !self.tables.is_empty() {
            files.push(("bands.gp".to_string(), self.plot_script().into_bytes()));
        }
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: self.config_sha256.clone(),
            seed: self.seed,
            outputs: files
                .iter()
                .map(|(name, bytes)| (name.clone(), hex::encode(Sha256::digest(bytes))))
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        files.push(("manifest.json".to_string(), text.into_bytes()));
        Ok(files)
    }

    fn plot_script(&self) -> String {
        let mut s = String::from("set datafile separator ','\nset xlabel 'theta'\nset ylabel 'energy'\n");
        for (stem, t) in &self.tables {
            let _ = writeln!(s, "set title '{stem}'");
            let _ = writeln!(
                s,
                "plot for [n=1:{}] '{stem}.csv' every ::1 using 1:($2==n ? $3 : 1/0) with linespoints title sprintf('band %d', n)",
                t.band_count().max(1)
            );
            s.push_str("pause -1\n");
        }
        s
    }

    /// Writes every file into `dir` (created if needed) and returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let files = self.files()?;
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(dir.join("manifest.json"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub package_version: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub outputs: BTreeMap<String, String>,
}

fn build(config: &RunConfig, spec: &CurveSpec) -> Result<PeriodicCurve> {
    build_curve(spec, config.curve_points)
}

fn radius_stem(a: f64) -> String {
    format!("tube-a{a}")
}

/// Runs all tasks in order. Call [`RunConfig::validate`] first.
pub fn execute(config: &RunConfig, seed: Option<u64>) -> Result<RunOutput> {
    let curve = build(config, &config.curve)?;
    let length = curve.length();
    let mut out = RunOutput {
        config_sha256: config.digest()?,
        seed,
        tables: Vec::new(),
        certificates: Vec::new(),
    };
    let mut tube_stems: Vec<String> = Vec::new();
    let mut leaky_stems: Vec<String> = Vec::new();

    for task in &config.tasks {
        match task {
            Task::HillBands { truncation, bands } => {
                let grid = config.grid.build(length)?;
                out.tables
                    .push(("hill".into(), hill_bands(&curve, &grid, *truncation, *bands)?));
            }
            Task::TubeBands {
                radii,
                truncation,
                transverse_modes,
                window_index,
            } => {
                let grid = config.grid.build(length)?;
                for &a in radii {
                    let cfg = tube_config(a, *truncation, *transverse_modes, *window_index);
                    let stem = radius_stem(a);
                    out.tables.push((stem.clone(), tube_bands(&curve, &cfg, &grid)?));
                    tube_stems.push(stem);
                }
            }
            Task::LeakyBands {
                couplings,
                boundary_points,
                bands,
                threshold_margin,
            } => {
                let b = curve.translation();
                let bnorm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
                let grid = config.grid.build(bnorm)?;
                for &alpha in couplings {
                    let cfg = leaky_config(alpha, *boundary_points, *bands, *threshold_margin);
                    let stem = format!("leaky-alpha{alpha}");
                    out.tables.push((stem.clone(), leaky_bands(&curve, &cfg, &grid)?));
                    leaky_stems.push(stem);
                }
            }
            Task::Slope { band } => {
                let (cert, _) = slope_from(&out, &tube_stems, *band)?;
                out.certificates.push(cert);
            }
            Task::Oscillation { radius, bands, floor } => {
                let stem = radius.map(radius_stem).unwrap_or_else(|| "hill".into());
                let table = lookup(&out, &stem)?;
                let cert = match (floor, radius) {
                    (Some(f), _) => oscillation_certificate(
                        Labeled::new(&stem, table),
                        bands,
                        OscillationFloor::Fixed(*f),
                    )?,
                    (None, Some(a)) => {
                        let (_, fit) = slope_from(&out, &tube_stems, bands[0])?;
                        oscillation_certificate(
                            Labeled::new(&stem, table),
                            bands,
                            OscillationFloor::Perturbative {
                                hill: Labeled::new("hill", lookup(&out, "hill")?),
                                constant: fit.constant,
                                radius: *a,
                            },
                        )?
                    }
                    (None, None) => unreachable!("rejected by validation"),
                };
                out.certificates.push(cert);
            }
            Task::Count => {
                let n0 = config
                    .tasks
                    .iter()
                    .find_map(|t| match t {
                        Task::TubeBands { window_index, .. } => Some(*window_index),
                        _ => None,
                    })
                    .unwrap_or(1);
                let labeled = labeled(&out, &tube_stems)?;
                out.certificates.push(count_certificate(&labeled, n0)?);
            }
            Task::StrongCoupling => {
                let labeled = labeled(&out, &leaky_stems)?;
                let hill = Labeled::new("hill", lookup(&out, "hill")?);
                out.certificates.push(strong_coupling_certificate(&labeled, hill)?);
            }
            Task::SmallCurvature {
                radius,
                amplitudes,
                truncation,
                transverse_modes,
                window_index,
            } => {
                let cfg = tube_config(*radius, *truncation, *transverse_modes, *window_index);
                let mut stems = Vec::new();
                for &t in amplitudes {
                    let curved = build(config, &config.curve.scaled_amplitude(t))?;
                    let l = curved.length();
                    let straight = build(config, &CurveSpec::line(config.curve.dimension, l))?;
                    let grid = config.grid.build(l)?;
                    let cs = format!("small-curvature-t{t}-curved");
                    let ss = format!("small-curvature-t{t}-straight");
                    out.tables.push((cs.clone(), tube_bands(&curved, &cfg, &grid)?));
                    out.tables.push((ss.clone(), tube_bands(&straight, &cfg, &grid)?));
                    stems.push((t, cs, ss));
                }
                let family = stems
                    .iter()
                    .map(|(t, c, s)| {
                        Ok((
                            *t,
                            Labeled::new(c, lookup(&out, c)?),
                            Labeled::new(s, lookup(&out, s)?),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let cert = small_curvature_certificate(&family)?;
                out.certificates.push(cert);
            }
        }
    }
    Ok(out)
}

fn lookup<'a>(out: &'a RunOutput, stem: &str) -> Result<&'a BandStructure> {
    out.table(stem)
        .ok_or_else(|| config_error(format!("table {stem} is computed by a later task; reorder the tasks")))
}

fn labeled<'a>(out: &'a RunOutput, stems: &'a [String]) -> Result<Vec<Labeled<'a>>> {
    if stems.is_empty() {
        return Err(config_error("certificate task precedes the band task it needs"));
    }
    stems
        .iter()
        .map(|s| Ok(Labeled::new(s.as_str(), lookup(out, s)?)))
        .collect()
}

fn slope_from(
    out: &RunOutput,
    tube_stems: &[String],
    band: usize,
) -> Result<(Certificate, crate::verify::SlopeFit)> {
    let tubes = labeled(out, tube_stems)?;
    let hill = Labeled::new("hill", lookup(out, "hill")?);
    slope_certificate(&tubes, hill, band)
}

/// Validates and executes on a pool of `workers` threads (default: available parallelism).
pub fn execute_with_workers(
    config: &RunConfig,
    workers: Option<usize>,
    seed: Option<u64>,
) -> Result<RunOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or(config.workers) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| config_error(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(config, seed))
}
