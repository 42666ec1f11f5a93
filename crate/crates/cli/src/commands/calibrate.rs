//! `mtcsim calibrate`: linear sensor calibration from (T, V) samples and
//! optional voltage-to-temperature transforms.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use mtc_core::analysis::fit::{fit_linear_calibration, voltage_to_temperature};
use mtc_core::io::csvio;

use crate::commands::{now_unix, prepare_out_dir, write_json, write_meta, RunMeta};
use crate::config::{thread_cap, RunConfig};
use crate::exit::CliError;

#[derive(Serialize)]
struct CalibrationArtifact {
    provenance: String,
    slope_v_per_k: f64,
    intercept_v: f64,
    bias_current_a: f64,
    residual_rms_v: f64,
    samples: usize,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = now_unix();
    let t0 = Instant::now();
    let out = prepare_out_dir(out_dir)?;

    let section = config
        .calibrate
        .as_ref()
        .ok_or_else(|| CliError::parse("run config is missing \"calibrate\""))?;
    let bias = config.bias_current()?;

    let samples_path = config.resolve(&section.samples_csv);
    let file = std::fs::File::open(&samples_path)
        .map_err(|e| CliError::parse(format!("{}: {e}", samples_path.display())))?;
    let samples =
        csvio::read_calibration_samples(std::io::BufReader::new(file)).map_err(CliError::from_parse)?;

    let cal = fit_linear_calibration(&samples, bias).map_err(CliError::from_parse)?;
    write_json(
        &out.join("calibration.json"),
        &CalibrationArtifact {
            provenance: "imported".to_string(),
            slope_v_per_k: cal.slope,
            intercept_v: cal.intercept,
            bias_current_a: cal.bias_current,
            residual_rms_v: cal.residual_rms,
            samples: samples.len(),
        },
    )?;

    if let Some(rel) = &section.voltages_csv {
        let path = config.resolve(rel);
        let file = std::fs::File::open(&path)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let voltages = csvio::read_voltages(std::io::BufReader::new(file)).map_err(CliError::from_parse)?;
        let rows: Result<Vec<(f64, f64)>, _> = voltages
            .iter()
            .map(|v| voltage_to_temperature(&cal, *v).map(|t| (*v, t)))
            .collect();
        let rows = rows.map_err(CliError::from_parse)?;
        let out_path = out.join("temperatures.csv");
        let file = std::fs::File::create(&out_path)
            .map_err(|e| CliError::io(format!("creating {}: {e}", out_path.display())))?;
        csvio::write_voltage_temperatures(std::io::BufWriter::new(file), &rows)
            .map_err(|e| CliError::io(e.to_string()))?;
    }

    write_meta(
        &out,
        &RunMeta {
            command: "calibrate",
            started_unix_s: started,
            elapsed_s: t0.elapsed().as_secs_f64(),
            threads: thread_cap(),
        },
    )?;
    eprintln!(
        "calibrate: slope {:.6e} V/K, intercept {:.6e} V over {} samples",
        cal.slope,
        cal.intercept,
        samples.len()
    );
    Ok(())
}
