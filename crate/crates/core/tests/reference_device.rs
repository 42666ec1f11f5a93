//! End-to-end checks of the shipped reference device at a coarse resolution.

use std::path::{Path, PathBuf};

use mtc_core::analysis::{extract_time_constant, finite_difference_rth, power_sweep};
use mtc_core::config;
use mtc_core::model::{build_grid, bind, integrate_power, Resolution};
use mtc_core::solver::{
    boundary_flux, probe_voxels, run_transient, solve_steady, unknown_count, SolverOptions,
    TemperatureField, TransientOptions,
};

fn reference_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference")
}

fn load_reference(materials_file: &str, res: Resolution) -> (mtc_core::model::Device, mtc_core::model::ScenarioSpec) {
    let dir = reference_dir();
    let materials = config::load_materials(&dir.join(materials_file)).unwrap();
    let spec = config::load_device(&dir.join("device.json")).unwrap();
    let scenario = config::load_scenario(&dir.join("scenario.json")).unwrap();
    let device = build_grid(&spec, &materials, res).unwrap();
    (device, scenario)
}

fn coarse() -> Resolution {
    Resolution { dx: 10e-6, dy: 10e-6, dz: 2e-6 }
}

#[test]
fn reference_builds_and_connects() {
    let (device, scenario) = load_reference("materials.json", coarse());
    // Bridge placement forces 5 um in-plane voxels regardless of the coarser
    // request.
    assert!((device.grid.dx - 5e-6).abs() < 1e-12);
    assert!((device.grid.dz - 2e-6).abs() < 1e-12);
    let bound = bind(&device, &scenario).unwrap();
    drop(bound);
    let n = unknown_count(&device, &scenario).unwrap();
    assert!(n > 10_000 && n < 200_000, "unknowns {n}");
    let audit = integrate_power(&device, &scenario).unwrap();
    assert!((audit.total - 1e-3).abs() < 1e-12);
}

#[test]
fn steady_one_milliwatt_physics() {
    let (device, scenario) = load_reference("materials.json", coarse());
    let field = solve_steady(&device, &scenario, &SolverOptions::default()).unwrap();
    let bound = bind(&device, &scenario).unwrap();

    let by_name = |name: &str| {
        let p = bound.probes.iter().find(|p| p.name == name).unwrap();
        probe_voxels(&field, &p.voxels, p.statistic)
    };
    let heater_max = by_name("heater_max");
    let sensor_avg = by_name("sensor_avg");
    let frame_max = by_name("frame_max");

    // The plate runs hotter than the frame and the heater hotter than the
    // sensor area.
    assert!(heater_max > sensor_avg && sensor_avg > frame_max, "{heater_max} / {sensor_avg} / {frame_max}");
    assert!(frame_max < 301.0, "frame should stay near ambient, got {frame_max}");

    // Thermal resistance from the 1 mW rise lands in the expected band.
    let rth = (sensor_avg - 300.0) / 1.0; // K/mW at 1 mW
    assert!((12.0..=25.0).contains(&rth), "R_th = {rth} K/mW");

    // Energy balance.
    let flux = boundary_flux(&device, &scenario, &field).unwrap();
    assert!(((flux - 1e-3) / 1e-3).abs() < 1e-4, "flux {flux}");
}

#[test]
fn transient_tau_in_band() {
    let (device, scenario) = load_reference("materials.json", coarse());
    let initial = TemperatureField::uniform(device.grid.voxel_count(), 300.0);
    let opts = TransientOptions {
        solver: SolverOptions::default(),
        t_end: 15e-3,
        dt: 20e-6,
        snapshot_every: 0,
    };
    let trace = run_transient(&device, &scenario, &initial, &opts).unwrap();
    assert!(trace.completed);

    // Both probe traces rise monotonically and the heater max dominates the
    // sensor average at every sample.
    let heater = trace.series_for("heater_max").unwrap();
    let sensor = trace.series_for("sensor_avg").unwrap();
    for i in 1..heater.len() {
        assert!(heater[i] >= heater[i - 1] - 1e-9);
        assert!(sensor[i] >= sensor[i - 1] - 1e-9);
        assert!(heater[i] >= sensor[i] - 1e-12);
    }

    let tc = extract_time_constant(&trace, "sensor_avg").unwrap();
    assert!(
        (0.7e-3..=3.0e-3).contains(&tc.crossing_s),
        "tau = {} ms",
        tc.crossing_s * 1e3
    );
    println!(
        "tau crossing {:.3} ms, exponential fit {:.3} ms",
        tc.crossing_s * 1e3,
        tc.exponential_fit_s * 1e3
    );
}

#[test]
fn sweep_monotone_rth_with_kt_materials() {
    let (device, scenario) = load_reference("materials.json", coarse());
    let powers: Vec<f64> = [1e-3, 5e-3, 10e-3, 15e-3, 20e-3].to_vec();
    let curve = power_sweep(&device, &scenario, &powers, "sensor_avg", &SolverOptions::default(), 1).unwrap();
    let rth = finite_difference_rth(&curve);
    println!("finite-difference R_th: {rth:?}");
    for w in rth.windows(2) {
        assert!(w[1] + 1e-9 >= w[0], "R_th not nondecreasing: {rth:?}");
    }
}
