//! `mtcsim report`: audits a fitted conversion curve — thermal resistance at
//! requested powers and the predicted temperature at the audit power against
//! the operating-temperature target. Refuses to combine artifacts whose
//! scenario hashes disagree.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use mtc_core::analysis::fit::{thermal_resistance, QuadraticFit};
use mtc_core::units::parse_power;

use crate::commands::{now_unix, prepare_out_dir, write_json, write_meta, RunMeta};
use crate::config::{thread_cap, RunConfig};
use crate::exit::CliError;

#[derive(Deserialize)]
struct FitArtifactIn {
    scenario_hash: String,
    c0_k: f64,
    c1_k_per_mw: f64,
    c2_k_per_mw2: f64,
    residual_rms_k: f64,
}

#[derive(Deserialize)]
struct AnyArtifact {
    #[serde(default)]
    scenario_hash: Option<String>,
}

#[derive(Serialize)]
struct ReportArtifact {
    scenario_hash: String,
    c0_k: f64,
    c1_k_per_mw: f64,
    c2_k_per_mw2: f64,
    audit_power_mw: f64,
    predicted_temperature_k: f64,
    target_temperature_k: f64,
    meets_target_below_audit_power: bool,
    rth_at_audit_power_k_per_mw: f64,
    rth_table: Vec<(f64, f64)>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = now_unix();
    let t0 = Instant::now();
    let out = prepare_out_dir(out_dir)?;

    let section = config
        .report
        .as_ref()
        .ok_or_else(|| CliError::parse("run config is missing \"report\""))?;

    let fit_path = config.resolve(&section.fit_json);
    let fit_in: FitArtifactIn = read_json(&fit_path)?;

    // Cross-check companion artifacts: a report must not mix runs.
    for rel in &section.inputs {
        let path = config.resolve(rel);
        let other: AnyArtifact = read_json(&path)?;
        if let Some(hash) = other.scenario_hash {
            let comparable = hash != "imported" && fit_in.scenario_hash != "imported";
            if comparable && hash != fit_in.scenario_hash {
                return Err(CliError::parse(format!(
                    "artifact {} has scenario hash {} but the fit carries {}; refusing to mix runs",
                    path.display(),
                    hash,
                    fit_in.scenario_hash
                )));
            }
        }
    }

    let fit = QuadraticFit {
        c0: fit_in.c0_k,
        c1: fit_in.c1_k_per_mw,
        c2: fit_in.c2_k_per_mw2,
        residual_rms: fit_in.residual_rms_k,
    };
    let audit_mw = parse_power(&section.audit_power).map_err(CliError::from_parse)? * 1e3;
    let predicted = fit.evaluate_mw(audit_mw);
    let target = section.target_temperature_k;
    let meets = predicted >= target;
    let rth_audit = thermal_resistance(&fit, audit_mw);
    let rth_table: Vec<(f64, f64)> = config
        .rth_powers_mw()?
        .into_iter()
        .map(|p| (p, thermal_resistance(&fit, p)))
        .collect();

    println!("scenario hash: {}", fit_in.scenario_hash);
    println!(
        "T(P) = {:.4} + {:.4} P + {:.4} P^2   (T in K, P in mW, residual RMS {:.3e} K)",
        fit.c0, fit.c1, fit.c2, fit.residual_rms
    );
    for (p, rth) in &rth_table {
        println!("R_th at {p:.3} mW: {rth:.4} K/mW");
    }
    println!(
        "predicted T at {audit_mw:.3} mW: {predicted:.2} K (target {target:.1} K reached below that power: {})",
        if meets { "yes" } else { "no" }
    );

    write_json(
        &out.join("report.json"),
        &ReportArtifact {
            scenario_hash: fit_in.scenario_hash,
            c0_k: fit.c0,
            c1_k_per_mw: fit.c1,
            c2_k_per_mw2: fit.c2,
            audit_power_mw: audit_mw,
            predicted_temperature_k: predicted,
            target_temperature_k: target,
            meets_target_below_audit_power: meets,
            rth_at_audit_power_k_per_mw: rth_audit,
            rth_table,
        },
    )?;

    write_meta(
        &out,
        &RunMeta {
            command: "report",
            started_unix_s: started,
            elapsed_s: t0.elapsed().as_secs_f64(),
            threads: thread_cap(),
        },
    )?;
    Ok(())
}
