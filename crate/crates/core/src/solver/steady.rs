//! Steady-state solve: successive substitution over the temperature-dependent
//! conductivities, with the linear solve delegated to conjugate gradient.

use crate::error::SolveError;
use crate::hash::scenario_hash;
use crate::model::grid::Device;
use crate::model::material::Axis;
use crate::model::scenario::{bind, BoundScenario, ScenarioSpec, VoxelRole};
use crate::solver::cg::{self, CgOptions};
use crate::solver::field::TemperatureField;
use crate::solver::system::assemble_steady;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub cg: CgOptions,
    /// Fixed-point convergence threshold on max |T_new - T_prev|, kelvin.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Under-relaxation factor in (0, 1]; 1.0 applies full updates.
    pub picard_damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cg: CgOptions::default(),
            picard_tol: 1e-6,
            picard_max_iter: 100,
            picard_damping: 1.0,
        }
    }
}

/// Solves the steady heat equation for a scenario.
///
/// Conductivities are evaluated at the previous iterate's temperatures and
/// the linearized system re-solved until the largest temperature update
/// falls below `picard_tol`. With only temperature-independent materials a
/// single iteration runs.
pub fn solve_steady(
    device: &Device,
    scenario: &ScenarioSpec,
    opts: &SolverOptions,
) -> Result<TemperatureField, SolveError> {
    let bound = bind(device, scenario)?;
    solve_steady_bound(device, scenario, &bound, opts)
}

pub(crate) fn solve_steady_bound(
    device: &Device,
    scenario: &ScenarioSpec,
    bound: &BoundScenario,
    opts: &SolverOptions,
) -> Result<TemperatureField, SolveError> {
    let n_voxels = bound.role.len();
    let mut field = TemperatureField::uniform(n_voxels, bound.ambient);
    // Fixed voxels keep their imposed value in the linearization field.
    for i in 0..n_voxels {
        if let VoxelRole::Fixed(t) = bound.role[i] {
            field.values[i] = t;
        }
    }

    let temperature_dependent = (0..n_voxels).any(|i| {
        bound.role[i] != VoxelRole::Excluded
            && !device.materials.get(bound.material[i]).conductivity.is_constant()
    });

    let mut history = Vec::new();
    let mut guess: Vec<f64> = Vec::new();
    let max_iter = if temperature_dependent { opts.picard_max_iter } else { 1 };

    for iteration in 0..max_iter {
        let system = assemble_steady(device, bound, &field)?;
        if guess.len() != system.matrix.n {
            // Unknowns are rises above ambient; the uniform-ambient start is
            // all zeros.
            guess = system
                .voxel_of_unknown
                .iter()
                .map(|&i| field.values[i] - system.reference_temperature)
                .collect();
        }
        let last_report = cg::solve(&system.matrix, &system.rhs, &mut guess, &opts.cg)?;

        let mut max_delta: f64 = 0.0;
        for (u, &i) in system.voxel_of_unknown.iter().enumerate() {
            let prev_rise = field.values[i] - system.reference_temperature;
            let rise = if opts.picard_damping == 1.0 {
                guess[u]
            } else {
                prev_rise + opts.picard_damping * (guess[u] - prev_rise)
            };
            let new_t = system.reference_temperature + rise;
            max_delta = max_delta.max((rise - prev_rise).abs());
            field.values[i] = new_t;
            if !new_t.is_finite() || new_t <= 0.0 {
                return Err(SolveError::NonFinite {
                    context: format!("temperature {new_t} K at voxel {i} in iteration {iteration}"),
                });
            }
            // Damped updates feed the next linear solve's initial guess.
            guess[u] = rise;
        }
        history.push(max_delta);

        if !temperature_dependent || max_delta <= opts.picard_tol {
            field.metadata = crate::solver::field::FieldMetadata {
                scenario_hash: scenario_hash(device, scenario),
                cg_iterations: last_report.iterations,
                cg_residual: last_report.residual,
                picard_iterations: history.len(),
                picard_history: history,
            };
            return Ok(field);
        }
    }

    let last_delta = *history.last().unwrap_or(&f64::INFINITY);
    Err(SolveError::PicardNonConvergence {
        iterations: history.len(),
        last_delta,
        history,
    })
}

/// Heat leaving the domain through all fixed-temperature couplings, watts.
///
/// Uses the same conductance formulas as the assembly with conductivities
/// evaluated at the given field, so a converged steady field balances the
/// injected power to the solver tolerance.
pub fn boundary_flux(
    device: &Device,
    scenario: &ScenarioSpec,
    field: &TemperatureField,
) -> Result<f64, SolveError> {
    let bound = bind(device, scenario)?;
    Ok(boundary_flux_bound(device, &bound, field))
}

pub(crate) fn boundary_flux_bound(
    device: &Device,
    bound: &BoundScenario,
    field: &TemperatureField,
) -> f64 {
    let grid = &device.grid;
    let areas = [grid.dy * grid.dz, grid.dx * grid.dz, grid.dx * grid.dy];
    let dists = [grid.dx, grid.dy, grid.dz];
    let mut flux = 0.0;

    let k_of = |voxel: usize, axis: Axis| {
        device
            .materials
            .get(bound.material[voxel])
            .conductivity_along(axis, field.values[voxel])
    };

    for i in 0..grid.voxel_count() {
        if bound.role[i] != VoxelRole::Free {
            continue;
        }
        let (x, y, z) = grid.coords(i);
        let t_i = field.values[i];

        // Exterior Dirichlet faces: half-cell conductance.
        let face_checks = [
            (x == 0, 0, Axis::X),
            (x == grid.nx - 1, 1, Axis::X),
            (y == 0, 2, Axis::Y),
            (y == grid.ny - 1, 3, Axis::Y),
            (z == 0, 4, Axis::Z),
            (z == grid.nz - 1, 5, Axis::Z),
        ];
        for (at_face, slot, axis) in face_checks {
            if !at_face {
                continue;
            }
            if let Some(t_face) = bound.face_temperature[slot] {
                let a = axis.index();
                let c = k_of(i, axis) * areas[a] / (dists[a] / 2.0);
                flux += c * (t_i - t_face);
            }
        }

        // Couplings to fixed voxels: full center-to-center conductance.
        let neighbor_dirs = [
            (z > 0).then(|| (i - grid.nx * grid.ny, Axis::Z)),
            (y > 0).then(|| (i - grid.nx, Axis::Y)),
            (x > 0).then(|| (i - 1, Axis::X)),
            (x + 1 < grid.nx).then(|| (i + 1, Axis::X)),
            (y + 1 < grid.ny).then(|| (i + grid.nx, Axis::Y)),
            (z + 1 < grid.nz).then(|| (i + grid.nx * grid.ny, Axis::Z)),
        ];
        for item in neighbor_dirs.into_iter().flatten() {
            let (j, axis) = item;
            if let VoxelRole::Fixed(t_fix) = bound.role[j] {
                let a = axis.index();
                let ki = k_of(i, axis);
                let kj = k_of(j, axis);
                let c = 2.0 * ki * kj / (ki + kj) * areas[a] / dists[a];
                flux += c * (t_i - t_fix);
            }
        }
    }
    flux
}

/// Number of unknowns the scenario produces on this device, for size audits.
pub fn unknown_count(device: &Device, scenario: &ScenarioSpec) -> Result<usize, SolveError> {
    let bound = bind(device, scenario)?;
    Ok(bound.role.iter().filter(|r| **r == VoxelRole::Free).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::VoxelGrid;
    use crate::model::material::{ConductivityModel, ConductivityTable, Material, MaterialTable};
    use crate::model::scenario::{BoundaryCondition, GridFace, HeatSource, RegionRef, ScenarioSpec};
    use crate::model::grid::Region;

    fn rod(n: usize, k: f64, h: f64) -> Device {
        let materials = MaterialTable::new(vec![Material::constant("m", k, 1e6)]).unwrap();
        Device::from_parts(VoxelGrid::uniform_block(n, 1, 1, [h, h, h], 0), materials)
    }

    fn end_to_end(t_left: f64, t_right: f64) -> ScenarioSpec {
        ScenarioSpec {
            boundaries: vec![
                BoundaryCondition::Face { face: GridFace::XMin, temperature: t_left },
                BoundaryCondition::Face { face: GridFace::XMax, temperature: t_right },
            ],
            ..ScenarioSpec::with_side_walls(300.0)
        }
    }

    #[test]
    fn zero_power_gives_uniform_ambient() {
        let device = rod(20, 46.0, 1e-6);
        let scenario = end_to_end(300.0, 300.0);
        let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
        for v in &field.values {
            assert!((v - 300.0).abs() < 1e-9);
        }
        assert_eq!(field.metadata.picard_iterations, 1);
    }

    #[test]
    fn rod_with_fixed_ends_is_exactly_linear() {
        let n = 101;
        let h = 1e-6;
        let device = rod(n, 46.0, h);
        let scenario = end_to_end(300.0, 400.0);
        let mut opts = SolverOptions::default();
        opts.cg.rel_tol = 1e-13;
        let field = solve_steady(&device, &scenario, &opts).unwrap();
        let len = n as f64 * h;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let expected = 300.0 + 100.0 * x / len;
            assert!(
                (field.values[i] - expected).abs() < 1e-9,
                "voxel {i}: {} vs {expected}",
                field.values[i]
            );
        }
        assert!((field.values[n / 2] - 350.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_generation_matches_parabola_within_h_squared() {
        let n = 40;
        let h = 1e-6;
        let k = 10.0;
        let q = 1e8; // W/m^3
        let device = rod(n, k, h);
        let len = n as f64 * h;
        let mut scenario = end_to_end(300.0, 300.0);
        scenario.sources.push(HeatSource {
            region: RegionRef::Box(Region::new([0.0, 0.0, 0.0], [len, h, h])),
            power: q * len * h * h,
        });
        let mut opts = SolverOptions::default();
        opts.cg.rel_tol = 1e-13;
        let field = solve_steady(&device, &scenario, &opts).unwrap();
        let center = field.values[n / 2 - 1].max(field.values[n / 2]);
        let closed_form = 300.0 + q * len * len / (8.0 * k);
        let h2_error = q * h * h / (8.0 * k);
        assert!(
            (center - closed_form).abs() <= 2.0 * h2_error + 1e-9,
            "center {center} vs {closed_form} (h^2 scale {h2_error})"
        );
    }

    #[test]
    fn constant_k_runs_exactly_one_picard_iteration() {
        let device = rod(10, 46.0, 1e-6);
        let scenario = end_to_end(300.0, 400.0);
        let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
        assert_eq!(field.metadata.picard_iterations, 1);
    }

    #[test]
    fn temperature_dependent_k_converges_and_balances() {
        let table = ConductivityTable::new(vec![(300.0, 46.0), (600.0, 23.0)]).unwrap();
        let materials = MaterialTable::new(vec![Material {
            name: "gaas".into(),
            conductivity: ConductivityModel::Table(table),
            volumetric_heat_capacity: 1.74e6,
        }])
        .unwrap();
        let n = 30;
        let h = 1e-6;
        let device = Device::from_parts(VoxelGrid::uniform_block(n, 1, 1, [h, h, h], 0), materials);
        let len = n as f64 * h;
        let mut scenario = ScenarioSpec {
            boundaries: vec![BoundaryCondition::Face { face: GridFace::XMin, temperature: 300.0 }],
            ..ScenarioSpec::with_side_walls(300.0)
        };
        let power = 2e-3;
        scenario.sources.push(HeatSource {
            region: RegionRef::Box(Region::new([len - 5.0 * h, 0.0, 0.0], [len, h, h])),
            power,
        });
        let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
        assert!(field.metadata.picard_iterations > 1);
        let flux = boundary_flux(&device, &scenario, &field).unwrap();
        assert!(
            ((flux - power) / power).abs() < 1e-4,
            "flux {flux} vs injected {power}"
        );
    }

    #[test]
    fn flux_is_zero_without_sources() {
        let device = rod(10, 46.0, 1e-6);
        let scenario = end_to_end(300.0, 300.0);
        let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
        let flux = boundary_flux(&device, &scenario, &field).unwrap();
        assert!(flux.abs() < 1e-15);
    }

    #[test]
    fn maximum_principle_source_free() {
        // Constant k, no sources: temperatures stay within boundary values.
        let materials = MaterialTable::new(vec![Material::constant("m", 5.0, 1e6)]).unwrap();
        let device = Device::from_parts(
            VoxelGrid::uniform_block(6, 5, 4, [1e-6, 1e-6, 1e-6], 0),
            materials,
        );
        let scenario = ScenarioSpec {
            boundaries: vec![
                BoundaryCondition::Face { face: GridFace::XMin, temperature: 320.0 },
                BoundaryCondition::Face { face: GridFace::YMax, temperature: 410.0 },
                BoundaryCondition::Face { face: GridFace::ZMin, temperature: 355.0 },
            ],
            ..ScenarioSpec::with_side_walls(300.0)
        };
        let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
        for v in &field.values {
            assert!(*v >= 320.0 - 1e-9 && *v <= 410.0 + 1e-9);
        }
    }
}
