//! `mtcsim transient`: step-response run, probe trace CSV and time-constant
//! report (both estimators).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use mtc_core::analysis::tau::extract_time_constant;
use mtc_core::error::AnalysisError;
use mtc_core::io::csvio;
use mtc_core::io::vtk;
use mtc_core::solver::field::TemperatureField;
use mtc_core::solver::transient::{run_transient, TransientOptions};

use crate::commands::{now_unix, prepare_out_dir, write_json, write_meta, RunMeta};
use crate::config::{thread_cap, RunConfig};
use crate::exit::CliError;

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum TauEntry {
    Ok {
        crossing_s: f64,
        exponential_fit_s: f64,
        initial_k: f64,
        settled_k: f64,
        multiple_crossings: bool,
    },
    Unsettled {
        detail: String,
    },
    ZeroRise,
}

#[derive(Serialize)]
struct TauArtifact {
    scenario_hash: String,
    t_end_s: f64,
    dt_s: f64,
    scheme: &'static str,
    probes: BTreeMap<String, TauEntry>,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let started = now_unix();
    let t0 = Instant::now();
    let out = prepare_out_dir(out_dir)?;

    let (device, scenario, _) = config.build_device()?;
    let solver = config.solver_options()?;
    let (t_end, dt, snapshot_every) = config.transient_params()?;

    let initial = TemperatureField::uniform(device.grid.voxel_count(), scenario.ambient_temperature);
    let opts = TransientOptions { solver, t_end, dt, snapshot_every };
    let trace = match run_transient(&device, &scenario, &initial, &opts) {
        Ok(trace) => trace,
        Err((e, partial)) => {
            // Persist whatever was recorded before the failure.
            if !partial.times.is_empty() {
                let path = out.join("trace.csv");
                if let Ok(file) = std::fs::File::create(&path) {
                    let _ = csvio::write_trace(std::io::BufWriter::new(file), &partial);
                }
            }
            return Err(e.into());
        }
    };

    let path = out.join("trace.csv");
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::io(format!("creating {}: {e}", path.display())))?;
    csvio::write_trace(std::io::BufWriter::new(file), &trace)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;

    for (i, (t, snapshot)) in trace.snapshots.iter().enumerate() {
        let path = out.join(format!("field_{i:04}.vtk"));
        let file = std::fs::File::create(&path)
            .map_err(|e| CliError::io(format!("creating {}: {e}", path.display())))?;
        vtk::write_structured_points(
            std::io::BufWriter::new(file),
            &device.grid,
            snapshot,
            &format!("temperature at t = {t} s {}", trace.scenario_hash),
        )
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    }

    let mut probes = BTreeMap::new();
    let mut warned = false;
    for name in &trace.probe_names {
        let entry = match extract_time_constant(&trace, name) {
            Ok(tc) => TauEntry::Ok {
                crossing_s: tc.crossing_s,
                exponential_fit_s: tc.exponential_fit_s,
                initial_k: tc.initial_k,
                settled_k: tc.settled_k,
                multiple_crossings: tc.multiple_crossings,
            },
            Err(AnalysisError::Unsettled(detail)) => {
                eprintln!("warning: probe {name:?} unsettled: {detail}");
                warned = true;
                TauEntry::Unsettled { detail }
            }
            Err(AnalysisError::ZeroRise) => {
                eprintln!("warning: probe {name:?} shows no rise; no time constant");
                warned = true;
                TauEntry::ZeroRise
            }
            Err(other) => return Err(CliError::parse(other.to_string())),
        };
        probes.insert(name.clone(), entry);
    }
    write_json(
        &out.join("tau.json"),
        &TauArtifact {
            scenario_hash: trace.scenario_hash.clone(),
            t_end_s: t_end,
            dt_s: dt,
            scheme: trace.scheme,
            probes,
        },
    )?;

    if config.sweep.as_ref().map(|s| s.emit_gnuplot).unwrap_or(false) {
        emit_gnuplot(&out, &trace.probe_names)?;
    }

    write_meta(
        &out,
        &RunMeta {
            command: "transient",
            started_unix_s: started,
            elapsed_s: t0.elapsed().as_secs_f64(),
            threads: thread_cap(),
        },
    )?;
    if warned {
        eprintln!("transient: finished with warnings (see tau.json)");
    } else {
        eprintln!("transient: {} steps recorded", trace.times.len() - 1);
    }
    Ok(())
}

/// Tiny plot script for the trace CSV.
fn emit_gnuplot(out: &Path, probe_names: &[String]) -> Result<(), CliError> {
    let mut script = String::from(
        "set datafile separator ','\nset xlabel 't [s]'\nset ylabel 'T [K]'\nset key left top\nplot \\\n",
    );
    for (i, name) in probe_names.iter().enumerate() {
        let sep = if i + 1 < probe_names.len() { ", \\\n" } else { "\n" };
        script.push_str(&format!(
            "  'trace.csv' using 1:{} with lines title '{name}'{sep}",
            i + 2
        ));
    }
    std::fs::write(out.join("trace.gp"), script)
        .map_err(|e| CliError::io(format!("writing trace.gp: {e}")))?;
    Ok(())
}
