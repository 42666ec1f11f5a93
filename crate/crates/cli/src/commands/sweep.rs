//! `mtcsim sweep`: P-T conversion curve (simulated or imported), quadratic
//! fit and thermal-resistance table.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use mtc_core::analysis::fit::{fit_quadratic, thermal_resistance, PTCurve};
use mtc_core::analysis::sweep::power_sweep;
use mtc_core::error::AnalysisError;
use mtc_core::io::csvio;

use crate::commands::{now_unix, prepare_out_dir, write_json, write_meta, RunMeta};
use crate::config::{thread_cap, RunConfig};
use crate::exit::CliError;

#[derive(Serialize)]
struct RthEntry {
    power_mw: f64,
    rth_k_per_mw: f64,
}

#[derive(Serialize)]
struct FitArtifact {
    scenario_hash: String,
    c0_k: f64,
    c1_k_per_mw: f64,
    c2_k_per_mw2: f64,
    residual_rms_k: f64,
    samples: usize,
    probe: Option<String>,
    rth_table: Vec<RthEntry>,
}

fn map_analysis_err(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Solve(inner) => CliError::from(inner),
        other => CliError::parse(other.to_string()),
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = now_unix();
    let t0 = Instant::now();
    let out = prepare_out_dir(out_dir)?;

    let section = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::parse("run config is missing \"sweep\""))?;

    let (curve, probe_name): (PTCurve, Option<String>) = match &section.input_csv {
        Some(rel) => {
            let path = config.resolve(rel);
            let file = std::fs::File::open(&path)
                .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            let curve = csvio::read_pt_curve(std::io::BufReader::new(file)).map_err(map_analysis_err)?;
            (curve, None)
        }
        None => {
            let (device, scenario, _) = config.build_device()?;
            let opts = config.solver_options()?;
            let powers = config.sweep_powers()?;
            let probe = section.probe.clone().unwrap_or_else(|| "sensor_avg".to_string());
            let curve = power_sweep(&device, &scenario, &powers, &probe, &opts, thread_cap())
                .map_err(map_analysis_err)?;
            (curve, Some(probe))
        }
    };

    let path = out.join("pt_curve.csv");
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::io(format!("creating {}: {e}", path.display())))?;
    csvio::write_pt_curve(std::io::BufWriter::new(file), &curve)
        .map_err(|e| CliError::io(e.to_string()))?;

    let fit = fit_quadratic(&curve).map_err(map_analysis_err)?;
    let rth_table: Vec<RthEntry> = config
        .rth_powers_mw()?
        .into_iter()
        .map(|p_mw| RthEntry {
            power_mw: p_mw,
            rth_k_per_mw: thermal_resistance(&fit, p_mw),
        })
        .collect();
    write_json(
        &out.join("fit.json"),
        &FitArtifact {
            scenario_hash: curve.provenance.clone(),
            c0_k: fit.c0,
            c1_k_per_mw: fit.c1,
            c2_k_per_mw2: fit.c2,
            residual_rms_k: fit.residual_rms,
            samples: curve.samples.len(),
            probe: probe_name,
            rth_table,
        },
    )?;

    if section.emit_gnuplot {
        let script = concat!(
            "set datafile separator ','\n",
            "set xlabel 'P [mW]'\n",
            "set ylabel 'T [K]'\n",
            "plot 'pt_curve.csv' using 1:2 with linespoints title 'P-T conversion'\n",
        );
        std::fs::write(out.join("pt_curve.gp"), script)
            .map_err(|e| CliError::io(format!("writing pt_curve.gp: {e}")))?;
    }

    write_meta(
        &out,
        &RunMeta {
            command: "sweep",
            started_unix_s: started,
            elapsed_s: t0.elapsed().as_secs_f64(),
            threads: thread_cap(),
        },
    )?;
    eprintln!(
        "sweep: {} points fitted, c1 = {:.4} K/mW, c2 = {:.4} K/mW^2",
        curve.samples.len(),
        fit.c1,
        fit.c2
    );
    Ok(())
}
