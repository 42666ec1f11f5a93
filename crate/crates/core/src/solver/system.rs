//! Finite-volume discretization of the heat equation on the voxel grid.
//!
//! Cell-centered scheme with a 7-point stencil. The conductance of the face
//! between two voxels is the harmonic mean of their conductivities (exact
//! for piecewise-linear 1D composites) scaled by face area over center
//! distance. Fixed temperatures are eliminated into the right-hand side;
//! exterior faces without a boundary condition are adiabatic.

use crate::error::SolveError;
use crate::model::grid::Device;
use crate::model::material::Axis;
use crate::model::scenario::{BoundScenario, VoxelRole};
use crate::solver::field::TemperatureField;

/// Compressed sparse row matrix with symmetric structure.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// y = A·x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for row in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[row] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.col_idx[k] == row {
                    d[row] = self.values[k];
                }
            }
        }
        d
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        (self.row_ptr[row]..self.row_ptr[row + 1])
            .map(|k| self.values[k])
            .sum()
    }
}

/// An assembled steady (or transient-step) system over the free voxels.
///
/// The unknowns are temperature RISES above `reference_temperature` (the
/// scenario ambient): with fixed temperatures at ambient the right-hand side
/// is exactly proportional to the injected power, so the solved field scales
/// bit-for-bit with it. Add the reference back to read temperatures.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// The temperature the unknowns are measured against.
    pub reference_temperature: f64,
    /// unknown index per voxel, usize::MAX where the voxel carries none.
    pub unknown_of_voxel: Vec<usize>,
    pub voxel_of_unknown: Vec<usize>,
    /// Sum of Dirichlet couplings folded into each diagonal. Rows without
    /// boundary couplings sum to zero (conservation structure).
    pub dirichlet_conductance: Vec<f64>,
    /// Number of Dirichlet couplings per row.
    pub dirichlet_links: Vec<u32>,
}

pub const NO_UNKNOWN: usize = usize::MAX;

/// Builds the unknown numbering for a bound scenario.
pub fn unknown_map(bound: &BoundScenario) -> (Vec<usize>, Vec<usize>) {
    let n = bound.role.len();
    let mut unknown_of_voxel = vec![NO_UNKNOWN; n];
    let mut voxel_of_unknown = Vec::new();
    for i in 0..n {
        if bound.role[i] == VoxelRole::Free {
            unknown_of_voxel[i] = voxel_of_unknown.len();
            voxel_of_unknown.push(i);
        }
    }
    (unknown_of_voxel, voxel_of_unknown)
}

struct FaceGeometry {
    /// Axis per direction, visiting -z, -y, -x, +x, +y, +z.
    axes: [Axis; 6],
    /// Face area per direction.
    areas: [f64; 6],
    /// Center-to-center distance per direction.
    dists: [f64; 6],
    /// Grid face slot per direction (for exterior Dirichlet lookup).
    face_slots: [usize; 6],
}

fn face_geometry(device: &Device) -> FaceGeometry {
    let g = &device.grid;
    FaceGeometry {
        axes: [Axis::Z, Axis::Y, Axis::X, Axis::X, Axis::Y, Axis::Z],
        areas: [
            g.dx * g.dy,
            g.dx * g.dz,
            g.dy * g.dz,
            g.dy * g.dz,
            g.dx * g.dz,
            g.dx * g.dy,
        ],
        dists: [g.dz, g.dy, g.dx, g.dx, g.dy, g.dz],
        face_slots: [4, 2, 0, 1, 3, 5],
    }
}

fn neighbor_in_grid(device: &Device, i: usize, dir: usize) -> Option<usize> {
    let g = &device.grid;
    let (x, y, z) = g.coords(i);
    match dir {
        0 => (z > 0).then(|| i - g.nx * g.ny),
        1 => (y > 0).then(|| i - g.nx),
        2 => (x > 0).then(|| i - 1),
        3 => (x + 1 < g.nx).then(|| i + 1),
        4 => (y + 1 < g.ny).then(|| i + g.nx),
        5 => (z + 1 < g.nz).then(|| i + g.nx * g.ny),
        _ => unreachable!(),
    }
}

fn conductivity(
    device: &Device,
    bound: &BoundScenario,
    t_lin: &TemperatureField,
    voxel: usize,
    axis: Axis,
) -> Result<f64, SolveError> {
    let mat = device.materials.get(bound.material[voxel]);
    let k = mat.conductivity_along(axis, t_lin.values[voxel]);
    if !k.is_finite() || k <= 0.0 {
        return Err(SolveError::NonFinite {
            context: format!("conductivity of {:?} at {} K", mat.name, t_lin.values[voxel]),
        });
    }
    Ok(k)
}

/// Assembles the steady-state system with conductivities evaluated at the
/// linearization field `t_lin` (pass a uniform ambient field for the first
/// nonlinear iteration).
pub fn assemble_steady(
    device: &Device,
    bound: &BoundScenario,
    t_lin: &TemperatureField,
) -> Result<LinearSystem, SolveError> {
    let (unknown_of_voxel, voxel_of_unknown) = unknown_map(bound);
    let n = voxel_of_unknown.len();
    let geo = face_geometry(device);
    let vol = device.grid.voxel_volume();

    // Pass 1: nonzeros per row (diagonal plus free neighbors, in ascending
    // column order because directions are visited from -z to +z).
    let mut row_ptr = vec![0usize; n + 1];
    for (u, &i) in voxel_of_unknown.iter().enumerate() {
        let mut count = 1;
        for dir in 0..6 {
            if let Some(j) = neighbor_in_grid(device, i, dir) {
                if bound.role[j] == VoxelRole::Free {
                    count += 1;
                }
            }
        }
        row_ptr[u + 1] = row_ptr[u] + count;
    }

    let nnz = row_ptr[n];
    let mut col_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    let mut rhs = vec![0.0f64; n];
    let mut dirichlet_conductance = vec![0.0f64; n];
    let mut dirichlet_links = vec![0u32; n];

    for (u, &i) in voxel_of_unknown.iter().enumerate() {
        let mut slot = row_ptr[u];
        let mut diag = 0.0;
        let mut diag_slot = None;

        for dir in 0..6 {
            let axis = geo.axes[dir];
            let area = geo.areas[dir];
            let dist = geo.dists[dir];

            match neighbor_in_grid(device, i, dir) {
                Some(j) => match bound.role[j] {
                    VoxelRole::Free => {
                        let ki = conductivity(device, bound, t_lin, i, axis)?;
                        let kj = conductivity(device, bound, t_lin, j, axis)?;
                        let c = 2.0 * ki * kj / (ki + kj) * area / dist;
                        diag += c;
                        // Keep columns ascending: the diagonal is reserved
                        // just before the first higher-index neighbor.
                        if dir >= 3 && diag_slot.is_none() {
                            diag_slot = Some(slot);
                            slot += 1;
                        }
                        col_idx[slot] = unknown_of_voxel[j];
                        values[slot] = -c;
                        slot += 1;
                    }
                    VoxelRole::Fixed(t_fix) => {
                        let ki = conductivity(device, bound, t_lin, i, axis)?;
                        let kj = conductivity(device, bound, t_lin, j, axis)?;
                        let c = 2.0 * ki * kj / (ki + kj) * area / dist;
                        diag += c;
                        rhs[u] += c * (t_fix - bound.ambient);
                        dirichlet_conductance[u] += c;
                        dirichlet_links[u] += 1;
                    }
                    VoxelRole::Excluded => {} // adiabatic
                },
                None => {
                    // Exterior face: Dirichlet at the face plane through the
                    // half cell, otherwise adiabatic.
                    if let Some(t_face) = bound.face_temperature[geo.face_slots[dir]] {
                        let ki = conductivity(device, bound, t_lin, i, axis)?;
                        let c = ki * area / (dist / 2.0);
                        diag += c;
                        rhs[u] += c * (t_face - bound.ambient);
                        dirichlet_conductance[u] += c;
                        dirichlet_links[u] += 1;
                    }
                }
            }
        }

        // Without a higher-index free neighbor the last slot is the diagonal.
        let diag_slot = diag_slot.unwrap_or(slot);
        if diag_slot == slot {
            slot += 1;
        }
        col_idx[diag_slot] = u;
        values[diag_slot] = diag;
        rhs[u] += bound.q[i] * vol;
        debug_assert_eq!(slot, row_ptr[u + 1]);
    }

    Ok(LinearSystem {
        matrix: CsrMatrix { n, row_ptr, col_idx, values },
        rhs,
        reference_temperature: bound.ambient,
        unknown_of_voxel,
        voxel_of_unknown,
        dirichlet_conductance,
        dirichlet_links,
    })
}

/// Lumped heat capacity per unknown: ρ·c_p times voxel volume, J/K.
pub fn assemble_capacity(device: &Device, bound: &BoundScenario, system: &LinearSystem) -> Vec<f64> {
    let vol = device.grid.voxel_volume();
    system
        .voxel_of_unknown
        .iter()
        .map(|&i| device.materials.get(bound.material[i]).volumetric_heat_capacity * vol)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::VoxelGrid;
    use crate::model::material::{Material, MaterialTable};
    use crate::model::scenario::{bind, BoundaryCondition, GridFace, ScenarioSpec};

    fn rod_device(k_left: f64, k_right: f64, n: usize) -> Device {
        let materials = MaterialTable::new(vec![
            Material::constant("left", k_left, 1e6),
            Material::constant("right", k_right, 1e6),
        ])
        .unwrap();
        let mut grid = VoxelGrid::uniform_block(n, 1, 1, [1e-6, 1e-6, 1e-6], 0);
        for i in n / 2..n {
            grid.set_material(i, 1);
        }
        Device::from_parts(grid, materials)
    }

    #[test]
    fn pinned_rod_has_single_unknown_with_two_couplings() {
        // 3-voxel rod whose end voxels are held by material tags: one unknown
        // coupled to both eliminated neighbors.
        let materials = MaterialTable::new(vec![
            Material::constant("left_fixed", 10.0, 1e6),
            Material::constant("core", 10.0, 1e6),
            Material::constant("right_fixed", 10.0, 1e6),
        ])
        .unwrap();
        let mut grid = VoxelGrid::uniform_block(3, 1, 1, [1e-6, 1e-6, 1e-6], 1);
        grid.set_material(0, 0);
        grid.set_material(2, 2);
        let device = Device::from_parts(grid, materials);
        let scenario = ScenarioSpec {
            boundaries: vec![
                BoundaryCondition::MaterialTag { material: "left_fixed".into(), temperature: 300.0 },
                BoundaryCondition::MaterialTag { material: "right_fixed".into(), temperature: 400.0 },
            ],
            ..ScenarioSpec::with_side_walls(300.0)
        };
        let bound = bind(&device, &scenario).unwrap();
        let t0 = TemperatureField::uniform(3, 300.0);
        let sys = assemble_steady(&device, &bound, &t0).unwrap();
        assert_eq!(sys.matrix.n, 1);
        assert_eq!(sys.dirichlet_links[0], 2);
        // Single equation: diag*rise = rhs, solution is the mean of the ends.
        let t = sys.reference_temperature + sys.rhs[0] / sys.matrix.values[diag_slot(&sys, 0)];
        assert!((t - 350.0).abs() < 1e-9);
    }

    fn diag_slot(sys: &LinearSystem, row: usize) -> usize {
        (sys.matrix.row_ptr[row]..sys.matrix.row_ptr[row + 1])
            .find(|&k| sys.matrix.col_idx[k] == row)
            .unwrap()
    }

    #[test]
    fn interior_rows_sum_to_zero_before_elimination() {
        // Uniform block, Dirichlet on one face only: rows without boundary
        // couplings have zero row sum; rows with them sum to the eliminated
        // conductance.
        let materials = MaterialTable::new(vec![Material::constant("m", 12.0, 1e6)]).unwrap();
        let grid = VoxelGrid::uniform_block(4, 3, 3, [1e-6, 1e-6, 1e-6], 0);
        let device = Device::from_parts(grid, materials);
        let scenario = ScenarioSpec {
            boundaries: vec![BoundaryCondition::Face { face: GridFace::XMin, temperature: 350.0 }],
            ..ScenarioSpec::with_side_walls(300.0)
        };
        let bound = bind(&device, &scenario).unwrap();
        let t0 = TemperatureField::uniform(device.grid.voxel_count(), 300.0);
        let sys = assemble_steady(&device, &bound, &t0).unwrap();
        for row in 0..sys.matrix.n {
            let sum = sys.matrix.row_sum(row);
            let expected = sys.dirichlet_conductance[row];
            let scale = sys.matrix.values[diag_slot(&sys, row)];
            assert!(
                (sum - expected).abs() <= 1e-12 * scale,
                "row {row}: sum {sum} vs boundary {expected}"
            );
        }
    }

    #[test]
    fn symmetric_structure_and_values() {
        let device = rod_device(10.0, 40.0, 6);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.boundaries = vec![
            BoundaryCondition::Face { face: GridFace::XMin, temperature: 300.0 },
            BoundaryCondition::Face { face: GridFace::XMax, temperature: 400.0 },
        ];
        let bound = bind(&device, &scenario).unwrap();
        let t0 = TemperatureField::uniform(device.grid.voxel_count(), 300.0);
        let sys = assemble_steady(&device, &bound, &t0).unwrap();
        let m = &sys.matrix;
        for row in 0..m.n {
            for k in m.row_ptr[row]..m.row_ptr[row + 1] {
                let col = m.col_idx[k];
                let v = m.values[k];
                let back = (m.row_ptr[col]..m.row_ptr[col + 1])
                    .find(|&kk| m.col_idx[kk] == row)
                    .map(|kk| m.values[kk])
                    .expect("structurally symmetric");
                assert!((v - back).abs() <= 1e-15 * v.abs().max(1e-30));
            }
        }
    }

    #[test]
    fn interface_conductance_is_harmonic_mean() {
        // Two-material rod: the coupling across the material interface must
        // equal the series composition of the two half-cell resistances.
        let (k1, k2) = (10.0, 40.0);
        let device = rod_device(k1, k2, 4);
        let mut scenario = ScenarioSpec::with_side_walls(300.0);
        scenario.boundaries = vec![
            BoundaryCondition::Face { face: GridFace::XMin, temperature: 300.0 },
            BoundaryCondition::Face { face: GridFace::XMax, temperature: 400.0 },
        ];
        let bound = bind(&device, &scenario).unwrap();
        let t0 = TemperatureField::uniform(device.grid.voxel_count(), 300.0);
        let sys = assemble_steady(&device, &bound, &t0).unwrap();
        let m = &sys.matrix;
        // Interface between unknowns 1 and 2 (voxels 1 and 2).
        let h = 1e-6;
        let area = h * h;
        let series = 1.0 / (h / 2.0 / (k1 * area) + h / 2.0 / (k2 * area));
        let harmonic = 2.0 * k1 * k2 / (k1 + k2) * area / h;
        assert!((series - harmonic).abs() < 1e-9 * series);
        let coupling = (m.row_ptr[1]..m.row_ptr[2])
            .find(|&k| m.col_idx[k] == 2)
            .map(|k| -m.values[k])
            .unwrap();
        assert!((coupling - harmonic).abs() < 1e-15 * harmonic.abs());
    }
}
