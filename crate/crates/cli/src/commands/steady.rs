//! `mtcsim steady`: one steady solve, field export, probe report and energy
//! balance audit.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use mtc_core::model::scenario::{bind, integrate_power, ProbeStatistic};
use mtc_core::solver::field::probe_voxels;
use mtc_core::solver::steady::{boundary_flux, solve_steady};
use mtc_core::io::vtk;

use crate::commands::{now_unix, prepare_out_dir, write_json, write_meta, RunMeta};
use crate::config::{thread_cap, RunConfig};
use crate::exit::CliError;

#[derive(Serialize)]
struct ProbeReport {
    name: String,
    statistic: &'static str,
    temperature_k: f64,
}

#[derive(Serialize)]
struct ProbesArtifact {
    scenario_hash: String,
    ambient_k: f64,
    unknowns: usize,
    picard_iterations: usize,
    cg_iterations: usize,
    cg_residual: f64,
    probes: Vec<ProbeReport>,
}

#[derive(Serialize)]
struct EnergyArtifact {
    scenario_hash: String,
    injected_w: f64,
    per_source_w: Vec<f64>,
    boundary_flux_w: f64,
    relative_imbalance: f64,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = now_unix();
    let t0 = Instant::now();
    let out = prepare_out_dir(out_dir)?;

    let (device, scenario, _) = config.build_device()?;
    let opts = config.solver_options()?;
    let bound = bind(&device, &scenario).map_err(|e| CliError::parse(e.to_string()))?;
    let field = solve_steady(&device, &scenario, &opts)?;

    let write_field = config.steady.as_ref().map(|s| s.write_field).unwrap_or(true);
    if write_field {
        let path = out.join("field.vtk");
        let file = std::fs::File::create(&path)
            .map_err(|e| CliError::io(format!("creating {}: {e}", path.display())))?;
        // The title line carries the scenario hash so the field can be
        // matched to its probe/energy reports.
        let title = format!("steady temperature {}", field.metadata.scenario_hash);
        vtk::write_structured_points(std::io::BufWriter::new(file), &device.grid, &field, &title)
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    }

    let probes: Vec<ProbeReport> = bound
        .probes
        .iter()
        .map(|p| ProbeReport {
            name: p.name.clone(),
            statistic: match p.statistic {
                ProbeStatistic::Max => "max",
                ProbeStatistic::VolumeAverage => "average",
            },
            temperature_k: probe_voxels(&field, &p.voxels, p.statistic),
        })
        .collect();
    let unknowns = bound
        .role
        .iter()
        .filter(|r| matches!(r, mtc_core::model::scenario::VoxelRole::Free))
        .count();
    write_json(
        &out.join("probes.json"),
        &ProbesArtifact {
            scenario_hash: field.metadata.scenario_hash.clone(),
            ambient_k: scenario.ambient_temperature,
            unknowns,
            picard_iterations: field.metadata.picard_iterations,
            cg_iterations: field.metadata.cg_iterations,
            cg_residual: field.metadata.cg_residual,
            probes,
        },
    )?;

    let audit = integrate_power(&device, &scenario).map_err(|e| CliError::parse(e.to_string()))?;
    let flux = boundary_flux(&device, &scenario, &field)?;
    let imbalance = if audit.total != 0.0 {
        (flux - audit.total) / audit.total
    } else {
        flux
    };
    write_json(
        &out.join("energy.json"),
        &EnergyArtifact {
            scenario_hash: field.metadata.scenario_hash.clone(),
            injected_w: audit.total,
            per_source_w: audit.per_source,
            boundary_flux_w: flux,
            relative_imbalance: imbalance,
        },
    )?;

    write_meta(
        &out,
        &RunMeta {
            command: "steady",
            started_unix_s: started,
            elapsed_s: t0.elapsed().as_secs_f64(),
            threads: thread_cap(),
        },
    )?;
    eprintln!(
        "steady: {} unknowns, {} nonlinear iterations, energy imbalance {:.3e}",
        unknowns, field.metadata.picard_iterations, imbalance
    );
    Ok(())
}
