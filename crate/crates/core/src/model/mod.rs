//! Device model: materials, voxel grid, parametric geometry and scenarios.

pub mod grid;
pub mod hotplate;
pub mod material;
pub mod scenario;

pub use grid::{Device, FeatureVolume, Region, VoxelGrid};
pub use hotplate::{build_grid, HotplateSpec, LayerSpec, PlateRect, Resolution};
pub use material::{Axis, ConductivityModel, ConductivityTable, Material, MaterialId, MaterialTable, StackLayer};
pub use scenario::{
    bind, integrate_power, AmbientMode, BoundScenario, BoundaryCondition, GridFace, HeatSource,
    PowerAudit, Probe, ProbeStatistic, RegionRef, ScenarioSpec, VoxelRole,
};
