//! Electro-thermal simulation toolkit for suspended micro-hotplate devices.
//!
//! The crate covers the full pipeline from a parametric device description
//! to figures of merit:
//!
//! * [`model`] — materials with k(T), voxel grids, the parametric hot-plate
//!   builder and scenario definitions (sources, boundaries, probes);
//! * [`solver`] — conservative finite-volume assembly, Jacobi-preconditioned
//!   conjugate gradient, steady solves with successive substitution over
//!   k(T), and backward-Euler transients;
//! * [`analysis`] — power sweeps, the quadratic P-T conversion fit, thermal
//!   resistance ∂T/∂P, linear sensor calibration and thermal time-constant
//!   extraction;
//! * [`io`] — legacy-VTK field export and the CSV curve/trace formats;
//! * [`config`] — the JSON schemas for device, material and scenario files.
//!
//! All lengths, powers and times are SI internally; config files use unit
//! suffixes and are converted on parse. Results are deterministic: identical
//! inputs produce bit-identical grids, fields and artifacts.

pub mod analysis;
pub mod config;
pub mod error;
pub mod hash;
pub mod io;
pub mod model;
pub mod solver;
pub mod units;

pub use error::{AnalysisError, BuildError, ConfigError, ScenarioError, SolveError};
pub use hash::scenario_hash;
