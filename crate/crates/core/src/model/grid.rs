//! Regular 3-D voxel lattice with per-voxel material assignments.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::material::{MaterialId, MaterialTable};

/// Axis-aligned box in SI meters, min-corner inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Region {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

/// Analytic vs voxelized volume of one geometric feature, kept for
/// conservation audits and error reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVolume {
    pub analytic_m3: f64,
    pub voxel_m3: f64,
}

/// Regular voxel lattice. Linear index is `x + nx*(y + ny*z)`.
///
/// `material_id[i]` is meaningful only where `void[i]` is false. Void voxels
/// mark etched-away space; whether they are excluded from a solve (vacuum) or
/// filled with an ambient gas material is a per-scenario choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoxelGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Voxel edge lengths in meters.
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub material_id: Vec<MaterialId>,
    pub void: Vec<bool>,
}

impl VoxelGrid {
    /// A fully solid block of a single material.
    pub fn uniform_block(
        nx: usize,
        ny: usize,
        nz: usize,
        spacing: [f64; 3],
        material: MaterialId,
    ) -> Self {
        assert!(nx * ny * nz >= 1, "grid must contain at least one voxel");
        assert!(spacing.iter().all(|s| *s > 0.0), "voxel spacings must be positive");
        let n = nx * ny * nz;
        Self {
            nx,
            ny,
            nz,
            dx: spacing[0],
            dy: spacing[1],
            dz: spacing[2],
            material_id: vec![material; n],
            void: vec![false; n],
        }
    }

    /// An all-void grid; construction code paints solids into it.
    pub fn empty(nx: usize, ny: usize, nz: usize, spacing: [f64; 3]) -> Self {
        let mut g = Self::uniform_block(nx, ny, nz, spacing, 0);
        g.void.iter_mut().for_each(|v| *v = true);
        g
    }

    pub fn voxel_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny && z < self.nz);
        x + self.nx * (y + self.ny * z)
    }

    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let x = idx % self.nx;
        let y = (idx / self.nx) % self.ny;
        let z = idx / (self.nx * self.ny);
        (x, y, z)
    }

    /// Center of a voxel in meters.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let (x, y, z) = self.coords(idx);
        [
            (x as f64 + 0.5) * self.dx,
            (y as f64 + 0.5) * self.dy,
            (z as f64 + 0.5) * self.dz,
        ]
    }

    pub fn voxel_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.nx as f64 * self.dx,
            self.ny as f64 * self.dy,
            self.nz as f64 * self.dz,
        ]
    }

    pub fn set_material(&mut self, idx: usize, material: MaterialId) {
        self.material_id[idx] = material;
        self.void[idx] = false;
    }

    pub fn set_void(&mut self, idx: usize) {
        self.void[idx] = true;
    }

    pub fn is_void(&self, idx: usize) -> bool {
        self.void[idx]
    }

    /// Indices of non-void voxels whose centers lie in `region`.
    pub fn voxels_in(&self, region: &Region) -> Vec<usize> {
        (0..self.voxel_count())
            .filter(|&i| !self.void[i] && region.contains(self.center(i)))
            .collect()
    }

    pub fn solid_count(&self) -> usize {
        self.void.iter().filter(|v| !**v).count()
    }
}

/// A voxelized device: the grid, the material table it references (including
/// any film-stack entries derived during construction), named regions usable
/// by scenarios, and per-feature volume audits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Device {
    pub grid: VoxelGrid,
    pub materials: MaterialTable,
    pub regions: BTreeMap<String, Region>,
    pub features: BTreeMap<String, FeatureVolume>,
}

impl Device {
    /// Wraps a hand-built grid for tests and synthetic scenarios.
    pub fn from_parts(grid: VoxelGrid, materials: MaterialTable) -> Self {
        Self {
            grid,
            materials,
            regions: BTreeMap::new(),
            features: BTreeMap::new(),
        }
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.get(name)
    }
}
