//! File formats: legacy VTK fields and CSV curves/traces.

pub mod csvio;
pub mod vtk;
