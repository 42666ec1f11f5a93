//! Finite-volume assembly, linear solve, steady and transient drivers.

pub mod cg;
pub mod field;
pub mod steady;
pub mod system;
pub mod transient;

pub use cg::{CgOptions, CgReport};
pub use field::{probe, probe_region, probe_voxels, FieldMetadata, TemperatureField};
pub use steady::{boundary_flux, solve_steady, unknown_count, SolverOptions};
pub use system::{assemble_capacity, assemble_steady, CsrMatrix, LinearSystem};
pub use transient::{run_transient, TransientOptions, TransientTrace};
