//! Scenarios: heat sources, fixed-temperature boundaries, ambient handling
//! and probe definitions, plus their binding onto a concrete voxel grid.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::ScenarioError;
use crate::model::grid::{Device, Region};
use crate::model::material::MaterialId;

/// Exterior face of the grid box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridFace {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl GridFace {
    pub const SIDE_WALLS: [GridFace; 4] = [GridFace::XMin, GridFace::XMax, GridFace::YMin, GridFace::YMax];
}

/// Where a region is given by name it refers to the device's named regions
/// (heater, sensor, island, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RegionRef {
    Named(String),
    Box(Region),
}

impl RegionRef {
    pub fn resolve(&self, device: &Device) -> Result<Region, ScenarioError> {
        match self {
            RegionRef::Box(r) => Ok(*r),
            RegionRef::Named(name) => device.region(name).copied().ok_or_else(|| {
                ScenarioError::Config(crate::error::ConfigError::InvalidScenario(format!(
                    "unknown named region {name:?}"
                )))
            }),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RegionRef::Named(n) => n.clone(),
            RegionRef::Box(_) => "<box>".to_string(),
        }
    }
}

/// A heat source: total power distributed uniformly over a region's non-void
/// voxel volume.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatSource {
    pub region: RegionRef,
    /// Total power in watts.
    pub power: f64,
}

/// A fixed-temperature (Dirichlet) boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundaryCondition {
    /// Temperature imposed on an exterior face of the grid box; voxels
    /// touching the face couple to it through their half-cell conductance.
    Face { face: GridFace, temperature: f64 },
    /// All voxels of a material are held at a temperature and eliminated
    /// from the unknowns.
    MaterialTag { material: String, temperature: f64 },
}

/// Statistic reported by a probe over its region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeStatistic {
    Max,
    VolumeAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub name: String,
    pub region: RegionRef,
    pub statistic: ProbeStatistic,
}

/// Treatment of void (etched-away) voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AmbientMode {
    /// Void voxels carry no unknowns and no heat flows through them.
    Vacuum,
    /// Void voxels are filled with the named ambient gas material and
    /// conduct (no convection).
    StillAir,
}

/// A complete load case: sources, boundaries, ambient handling and probes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub sources: Vec<HeatSource>,
    pub boundaries: Vec<BoundaryCondition>,
    pub ambient_temperature: f64,
    pub ambient_mode: AmbientMode,
    /// Material used for void voxels in still-air mode.
    pub ambient_material: Option<String>,
    pub probes: Vec<Probe>,
}

impl ScenarioSpec {
    /// Side walls at the ambient temperature, no sources, no probes.
    pub fn with_side_walls(ambient: f64) -> Self {
        Self {
            sources: Vec::new(),
            boundaries: GridFace::SIDE_WALLS
                .iter()
                .map(|f| BoundaryCondition::Face { face: *f, temperature: ambient })
                .collect(),
            ambient_temperature: ambient,
            ambient_mode: AmbientMode::Vacuum,
            ambient_material: None,
            probes: Vec::new(),
        }
    }

    /// Returns a copy with every source's power replaced by `power` watts.
    /// Used by power sweeps; requires exactly one source.
    pub fn with_source_power(&self, power: f64) -> Result<Self, ScenarioError> {
        if self.sources.len() != 1 {
            return Err(ScenarioError::Config(crate::error::ConfigError::InvalidScenario(
                format!("power sweep requires exactly one source (found {})", self.sources.len()),
            )));
        }
        let mut out = self.clone();
        out.sources[0].power = power;
        Ok(out)
    }
}

/// A source resolved onto voxels.
#[derive(Debug, Clone)]
pub struct BoundSource {
    pub label: String,
    pub voxels: Vec<usize>,
    /// Volumetric generation rate Q in W/m³ over the source voxels.
    pub q: f64,
    pub power: f64,
}

/// A probe resolved onto voxels.
#[derive(Debug, Clone)]
pub struct BoundProbe {
    pub name: String,
    pub voxels: Vec<usize>,
    pub statistic: ProbeStatistic,
}

/// Per-voxel role in the solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VoxelRole {
    /// Carries an unknown temperature.
    Free,
    /// Held at a fixed temperature (eliminated).
    Fixed(f64),
    /// Excluded entirely (void under vacuum).
    Excluded,
}

/// A scenario bound to a device grid: per-voxel roles, effective materials,
/// resolved sources and probes, and face boundary temperatures.
#[derive(Debug)]
pub struct BoundScenario {
    pub ambient: f64,
    /// Effective material per voxel (ambient gas substituted in still-air
    /// mode); meaningless for excluded voxels.
    pub material: Vec<MaterialId>,
    pub role: Vec<VoxelRole>,
    /// Dirichlet temperature per exterior face, indexed by [GridFace].
    pub face_temperature: [Option<f64>; 6],
    pub sources: Vec<BoundSource>,
    pub probes: Vec<BoundProbe>,
    /// Volumetric source per voxel in W/m³.
    pub q: Vec<f64>,
}

fn face_slot(face: GridFace) -> usize {
    match face {
        GridFace::XMin => 0,
        GridFace::XMax => 1,
        GridFace::YMin => 2,
        GridFace::YMax => 3,
        GridFace::ZMin => 4,
        GridFace::ZMax => 5,
    }
}

/// Resolves a scenario against a device: assigns voxel roles, distributes
/// source powers, resolves probes and runs the connectivity check.
pub fn bind(device: &Device, scenario: &ScenarioSpec) -> Result<BoundScenario, ScenarioError> {
    let grid = &device.grid;
    let n = grid.voxel_count();

    if scenario.boundaries.is_empty() {
        return Err(ScenarioError::NoFixedBoundary);
    }

    let ambient_mat = match scenario.ambient_mode {
        AmbientMode::Vacuum => None,
        AmbientMode::StillAir => {
            let name = scenario
                .ambient_material
                .as_ref()
                .ok_or(ScenarioError::MissingAmbientMaterial)?;
            Some(device.materials.id_of(name)?)
        }
    };

    let mut material = vec![0 as MaterialId; n];
    let mut role = vec![VoxelRole::Excluded; n];
    for i in 0..n {
        if grid.is_void(i) {
            if let Some(gas) = ambient_mat {
                material[i] = gas;
                role[i] = VoxelRole::Free;
            }
        } else {
            material[i] = grid.material_id[i];
            role[i] = VoxelRole::Free;
        }
    }

    let mut face_temperature = [None; 6];
    for bc in &scenario.boundaries {
        match bc {
            BoundaryCondition::Face { face, temperature } => {
                face_temperature[face_slot(*face)] = Some(*temperature);
            }
            BoundaryCondition::MaterialTag { material: name, temperature } => {
                let id = device.materials.id_of(name)?;
                for i in 0..n {
                    if role[i] != VoxelRole::Excluded && material[i] == id {
                        role[i] = VoxelRole::Fixed(*temperature);
                    }
                }
            }
        }
    }

    // Distribute each source's power uniformly over its non-void voxels.
    let vol = grid.voxel_volume();
    let mut q = vec![0.0; n];
    let mut sources = Vec::with_capacity(scenario.sources.len());
    for s in &scenario.sources {
        let region = s.region.resolve(device)?;
        let voxels: Vec<usize> = grid
            .voxels_in(&region)
            .into_iter()
            .filter(|&i| role[i] != VoxelRole::Excluded)
            .collect();
        if voxels.is_empty() {
            return Err(ScenarioError::EmptySourceRegion(s.region.label()));
        }
        if voxels.iter().any(|&i| matches!(role[i], VoxelRole::Fixed(_))) {
            return Err(ScenarioError::SourceOnFixedVoxels(s.region.label()));
        }
        let density = s.power / (voxels.len() as f64 * vol);
        for &i in &voxels {
            q[i] += density;
        }
        sources.push(BoundSource {
            label: s.region.label(),
            voxels,
            q: density,
            power: s.power,
        });
    }

    let mut probes = Vec::with_capacity(scenario.probes.len());
    for p in &scenario.probes {
        let region = p.region.resolve(device)?;
        let voxels: Vec<usize> = grid
            .voxels_in(&region)
            .into_iter()
            .filter(|&i| role[i] != VoxelRole::Excluded)
            .collect();
        if voxels.is_empty() {
            return Err(ScenarioError::EmptyProbeRegion(p.name.clone()));
        }
        probes.push(BoundProbe {
            name: p.name.clone(),
            voxels,
            statistic: p.statistic,
        });
    }

    let bound = BoundScenario {
        ambient: scenario.ambient_temperature,
        material,
        role,
        face_temperature,
        sources,
        probes,
        q,
    };

    check_connectivity(device, &bound)?;
    Ok(bound)
}

/// Every free voxel must reach a fixed-temperature boundary through
/// face-adjacent free voxels, otherwise the steady problem is singular.
fn check_connectivity(device: &Device, bound: &BoundScenario) -> Result<(), ScenarioError> {
    let grid = &device.grid;
    let n = grid.voxel_count();
    let mut reached = vec![false; n];
    let mut queue = VecDeque::new();

    let mut any_boundary = false;
    for i in 0..n {
        if bound.role[i] != VoxelRole::Free {
            continue;
        }
        let (x, y, z) = grid.coords(i);
        let touches_face = (x == 0 && bound.face_temperature[0].is_some())
            || (x == grid.nx - 1 && bound.face_temperature[1].is_some())
            || (y == 0 && bound.face_temperature[2].is_some())
            || (y == grid.ny - 1 && bound.face_temperature[3].is_some())
            || (z == 0 && bound.face_temperature[4].is_some())
            || (z == grid.nz - 1 && bound.face_temperature[5].is_some());
        let touches_fixed = neighbors(grid, i).any(|j| matches!(bound.role[j], VoxelRole::Fixed(_)));
        if touches_face || touches_fixed {
            reached[i] = true;
            queue.push_back(i);
            any_boundary = true;
        }
    }
    if !any_boundary {
        // Either there are no free voxels at all (everything fixed: fine), or
        // nothing touches a boundary.
        if bound.role.iter().any(|r| *r == VoxelRole::Free) {
            return Err(ScenarioError::NoFixedBoundary);
        }
        return Ok(());
    }

    while let Some(i) = queue.pop_front() {
        for j in neighbors(grid, i) {
            if bound.role[j] == VoxelRole::Free && !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }

    let unreached: Vec<usize> = (0..n)
        .filter(|&i| bound.role[i] == VoxelRole::Free && !reached[i])
        .collect();
    if let Some(&first) = unreached.first() {
        return Err(ScenarioError::DisconnectedVoxels {
            count: unreached.len(),
            first_voxel: first,
        });
    }
    Ok(())
}

/// Face-adjacent neighbor indices of a voxel.
pub fn neighbors(grid: &crate::model::grid::VoxelGrid, i: usize) -> impl Iterator<Item = usize> + '_ {
    let (x, y, z) = grid.coords(i);
    let nx = grid.nx;
    let ny = grid.ny;
    let nz = grid.nz;
    let candidates = [
        (z > 0).then(|| i - nx * ny),
        (y > 0).then(|| i - nx),
        (x > 0).then(|| i - 1),
        (x + 1 < nx).then(|| i + 1),
        (y + 1 < ny).then(|| i + nx),
        (z + 1 < nz).then(|| i + nx * ny),
    ];
    candidates.into_iter().flatten()
}

/// Per-source and total injected power recovered by volume integration of
/// the discretized sources. Uniform distribution makes this exact by
/// construction; the audit guards the mapping from regions to voxels.
#[derive(Debug, Clone, Serialize)]
pub struct PowerAudit {
    pub per_source: Vec<f64>,
    pub total: f64,
}

pub fn integrate_power(device: &Device, scenario: &ScenarioSpec) -> Result<PowerAudit, ScenarioError> {
    let bound = bind(device, scenario)?;
    Ok(integrate_power_bound(device, &bound))
}

pub(crate) fn integrate_power_bound(device: &Device, bound: &BoundScenario) -> PowerAudit {
    let vol = device.grid.voxel_volume();
    let per_source: Vec<f64> = bound
        .sources
        .iter()
        .map(|s| s.q * vol * s.voxels.len() as f64)
        .collect();
    let total = per_source.iter().sum();
    PowerAudit { per_source, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::VoxelGrid;
    use crate::model::material::{Material, MaterialTable};

    fn block_device(nx: usize, ny: usize, nz: usize) -> Device {
        let materials = MaterialTable::new(vec![Material::constant("solid", 10.0, 1e6)]).unwrap();
        Device::from_parts(
            VoxelGrid::uniform_block(nx, ny, nz, [1e-6, 1e-6, 1e-6], 0),
            materials,
        )
    }

    fn full_region() -> RegionRef {
        RegionRef::Box(Region::new([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]))
    }

    #[test]
    fn power_integration_recovers_declared_power() {
        let device = block_device(4, 4, 4);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.sources.push(HeatSource { region: full_region(), power: 1e-3 });
        let audit = integrate_power(&device, &scenario).unwrap();
        assert!((audit.total - 1e-3).abs() <= 1e-12 * 1e-3);
        assert_eq!(audit.per_source.len(), 1);
    }

    #[test]
    fn zero_sources_integrate_to_zero() {
        let device = block_device(2, 2, 2);
        let scenario = ScenarioSpec::with_side_walls(300.0);
        let audit = integrate_power(&device, &scenario).unwrap();
        assert_eq!(audit.total, 0.0);
    }

    #[test]
    fn two_sources_are_additive() {
        let device = block_device(4, 2, 2);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.sources.push(HeatSource {
            region: RegionRef::Box(Region::new([0.0, 0.0, 0.0], [2e-6, 2e-6, 2e-6])),
            power: 3e-3,
        });
        scenario.sources.push(HeatSource {
            region: RegionRef::Box(Region::new([2e-6, 0.0, 0.0], [4e-6, 2e-6, 2e-6])),
            power: 7e-3,
        });
        let audit = integrate_power(&device, &scenario).unwrap();
        assert!((audit.per_source[0] - 3e-3).abs() < 1e-15);
        assert!((audit.per_source[1] - 7e-3).abs() < 1e-15);
        assert!((audit.total - 10e-3).abs() < 1e-15);
    }

    #[test]
    fn empty_source_region_is_rejected() {
        let device = block_device(2, 2, 2);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.sources.push(HeatSource {
            region: RegionRef::Box(Region::new([10.0, 10.0, 10.0], [11.0, 11.0, 11.0])),
            power: 1e-3,
        });
        assert!(matches!(
            integrate_power(&device, &scenario),
            Err(ScenarioError::EmptySourceRegion(_))
        ));
    }

    #[test]
    fn disconnected_solid_is_rejected() {
        // 3-voxel rod with the middle voxel void: the far voxel cannot reach
        // the XMin boundary.
        let materials = MaterialTable::new(vec![Material::constant("solid", 10.0, 1e6)]).unwrap();
        let mut grid = VoxelGrid::uniform_block(3, 1, 1, [1e-6, 1e-6, 1e-6], 0);
        grid.set_void(1);
        let device = Device::from_parts(grid, materials);
        let scenario = ScenarioSpec {
            boundaries: vec![BoundaryCondition::Face { face: GridFace::XMin, temperature: 300.0 }],
            ..ScenarioSpec::with_side_walls(300.0)
        };
        let err = bind(&device, &scenario).unwrap_err();
        assert!(matches!(err, ScenarioError::DisconnectedVoxels { count: 1, .. }));
    }

    #[test]
    fn still_air_mode_fills_void_with_gas() {
        let materials = MaterialTable::new(vec![
            Material::constant("solid", 10.0, 1e6),
            Material::constant("air", 0.026, 1186.0),
        ])
        .unwrap();
        let mut grid = VoxelGrid::uniform_block(3, 1, 1, [1e-6, 1e-6, 1e-6], 0);
        grid.set_void(1);
        let device = Device::from_parts(grid, materials);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.ambient_mode = AmbientMode::StillAir;
        scenario.ambient_material = Some("air".into());
        let bound = bind(&device, &scenario).unwrap();
        assert_eq!(bound.role[1], VoxelRole::Free);
        assert_eq!(bound.material[1], device.materials.id_of("air").unwrap());
    }

    #[test]
    fn still_air_without_material_is_rejected() {
        let device = block_device(2, 1, 1);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.ambient_mode = AmbientMode::StillAir;
        assert!(matches!(
            bind(&device, &scenario),
            Err(ScenarioError::MissingAmbientMaterial)
        ));
    }

    #[test]
    fn no_boundary_is_rejected() {
        let device = block_device(2, 1, 1);
        let scenario = ScenarioSpec {
            boundaries: Vec::new(),
            ..ScenarioSpec::with_side_walls(300.0)
        };
        assert!(matches!(bind(&device, &scenario), Err(ScenarioError::NoFixedBoundary)));
    }
}
