use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("curve samples are not periodic: {0}")]
    NonPeriodic(String),

    #[error("degenerate parametrization at t = {t}: speed {speed:e}")]
    DegenerateParametrization { t: f64, speed: f64 },

    #[error("insufficient smoothness: high-frequency energy fraction {fraction:e} exceeds 1e-2")]
    InsufficientSmoothness { fraction: f64 },

    #[error("inadmissible tube: {0}")]
    Inadmissible(String),

    #[error("period cell assumption violated: {0}")]
    PeriodCell(String),

    #[error("aliasing guard: tail energy fraction {fraction:e} exceeds {limit:e}; increase the curve grid")]
    Aliasing { fraction: f64, limit: f64 },

    #[error("transverse quadrature under-resolved: refinement changed entries by {change:e}")]
    QuadratureUnderresolved { change: f64 },

    #[error("{what} did not converge (residual {residual:e})")]
    Convergence { what: String, residual: f64 },

    #[error("Bessel zero bracketing failed for J_{order}, zero #{index}")]
    BesselZero { order: usize, index: usize },

    #[error("energy {energy} is not below the threshold {threshold}")]
    AboveThreshold { energy: f64, threshold: f64 },

    #[error("energy window below {top} is empty")]
    EmptyWindow { top: f64 },

    #[error("band tables do not match: {0}")]
    MismatchedTables(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
