//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while parsing or validating configuration input.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse {kind} from {text:?} (expected a number with unit suffix)")]
    BadQuantity { kind: String, text: String },
    #[error("material {0:?} is not defined in the material table")]
    UnknownMaterial(String),
    #[error("material {name:?}: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("device spec: {0}")]
    InvalidDevice(String),
    #[error("scenario: {0}")]
    InvalidScenario(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Errors raised while realizing a device spec on a voxel grid.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("feature {feature:?} is thinner than the requested resolution along {axis} ({size_m:.3e} m < {resolution_m:.3e} m)")]
    FeatureThinnerThanResolution {
        feature: String,
        axis: &'static str,
        size_m: f64,
        resolution_m: f64,
    },
    #[error("device spec: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Errors raised while binding a scenario to a grid.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("source region {0:?} contains zero non-void voxels")]
    EmptySourceRegion(String),
    #[error("source region {0:?} overlaps fixed-temperature voxels")]
    SourceOnFixedVoxels(String),
    #[error("probe region {0:?} contains zero non-void voxels")]
    EmptyProbeRegion(String),
    #[error("scenario declares no fixed-temperature boundary; the steady problem is singular")]
    NoFixedBoundary,
    #[error("{count} solid voxel(s) are not connected to any fixed-temperature boundary (first at index {first_voxel})")]
    DisconnectedVoxels { count: usize, first_voxel: usize },
    #[error("ambient mode is still-air but the scenario names no ambient material")]
    MissingAmbientMaterial,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Errors raised by the linear and nonlinear solvers.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("conjugate gradient did not converge within {iterations} iterations (relative residual {residual:.3e}, tolerance {tolerance:.3e})")]
    CgNonConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("fixed-point iteration did not converge within {iterations} iterations (last update {last_delta:.3e} K); history: {history:?}")]
    PicardNonConvergence {
        iterations: usize,
        last_delta: f64,
        history: Vec<f64>,
    },
    #[error("non-finite value produced at {context}")]
    NonFinite { context: String },
    #[error("time step must be positive (got {0})")]
    BadTimeStep(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Errors raised by the regression and extraction routines.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("quadratic fit needs at least 3 distinct abscissae (got {0})")]
    QuadraticRankDeficient(usize),
    #[error("linear fit needs at least 2 distinct abscissae (got {0})")]
    LinearRankDeficient(usize),
    #[error("calibration slope is zero; voltage cannot be inverted to temperature")]
    ZeroSlope,
    #[error("trace has not settled: {0}")]
    Unsettled(String),
    #[error("trace shows no rise; time constant is undefined")]
    ZeroRise,
    #[error("probe {0:?} not present in trace")]
    UnknownProbe(String),
    #[error("sweep powers must be non-empty and strictly increasing")]
    BadPowerList,
    #[error("curve import: {0}")]
    BadCurve(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
