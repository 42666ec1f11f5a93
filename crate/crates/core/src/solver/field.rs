//! Solved temperature fields and probe statistics.

use serde::Serialize;

use crate::error::ScenarioError;
use crate::model::grid::{Device, Region};
use crate::model::scenario::{BoundProbe, BoundScenario, ProbeStatistic, VoxelRole};

/// Solver bookkeeping attached to a field.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FieldMetadata {
    pub scenario_hash: String,
    /// Conjugate-gradient iterations of the last linear solve.
    pub cg_iterations: usize,
    /// Relative residual of the last linear solve.
    pub cg_residual: f64,
    /// Number of nonlinear (fixed-point) iterations performed.
    pub picard_iterations: usize,
    /// Max |ΔT| per nonlinear iteration, in kelvin.
    pub picard_history: Vec<f64>,
}

/// Temperatures per voxel. Void voxels excluded from a solve carry the
/// ambient temperature so the field stays exportable.
#[derive(Debug, Clone, Serialize)]
pub struct TemperatureField {
    pub values: Vec<f64>,
    pub metadata: FieldMetadata,
}

impl TemperatureField {
    pub fn uniform(n: usize, t: f64) -> Self {
        Self {
            values: vec![t; n],
            metadata: FieldMetadata::default(),
        }
    }

    pub fn get(&self, voxel: usize) -> f64 {
        self.values[voxel]
    }

    /// Max and min over voxels that take part in the solve.
    pub fn solved_range(&self, bound: &BoundScenario) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            if bound.role[i] != VoxelRole::Excluded {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        (lo, hi)
    }
}

/// Evaluates a probe statistic over a set of voxels. All voxels share the
/// same volume, so the volume-weighted average reduces to the mean; the
/// weighting is kept explicit for clarity.
pub fn probe_voxels(field: &TemperatureField, voxels: &[usize], statistic: ProbeStatistic) -> f64 {
    match statistic {
        ProbeStatistic::Max => voxels
            .iter()
            .map(|&i| field.values[i])
            .fold(f64::NEG_INFINITY, f64::max),
        ProbeStatistic::VolumeAverage => {
            let sum: f64 = voxels.iter().map(|&i| field.values[i]).sum();
            sum / voxels.len() as f64
        }
    }
}

/// Evaluates a statistic over an arbitrary region of non-void voxels.
pub fn probe_region(
    device: &Device,
    field: &TemperatureField,
    region: &Region,
    statistic: ProbeStatistic,
) -> Result<f64, ScenarioError> {
    let voxels = device.grid.voxels_in(region);
    if voxels.is_empty() {
        return Err(ScenarioError::EmptyProbeRegion("<box>".to_string()));
    }
    Ok(probe_voxels(field, &voxels, statistic))
}

/// Evaluates one bound probe.
pub fn probe(field: &TemperatureField, probe: &BoundProbe) -> f64 {
    probe_voxels(field, &probe.voxels, probe.statistic)
}
