//! Power sweeps: one steady solve per heater power, producing a P-T curve.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::AnalysisError;
use crate::hash::scenario_hash;
use crate::model::grid::Device;
use crate::model::scenario::{bind, ProbeStatistic, ScenarioSpec};
use crate::solver::field::probe_voxels;
use crate::solver::steady::{solve_steady_bound, SolverOptions};
use crate::analysis::fit::PTCurve;

/// Which probe defines "the temperature" of the conversion curve.
#[derive(Debug, Clone)]
pub enum SweepProbe {
    /// A named probe from the scenario. The default conversion temperature
    /// is the sensor-region volume average.
    Named(String),
}

/// Runs one steady solve per power and collects the probe temperature.
///
/// The scenario acts as a template: it must declare exactly one source whose
/// power is replaced by each sweep point. Solves for duplicate powers are
/// served from a cache keyed by the scenario hash. When `threads > 1`,
/// independent solves run concurrently; results follow input order
/// regardless of completion order.
pub fn power_sweep(
    device: &Device,
    scenario_template: &ScenarioSpec,
    powers_w: &[f64],
    probe_name: &str,
    opts: &SolverOptions,
    threads: usize,
) -> Result<PTCurve, AnalysisError> {
    if powers_w.is_empty() {
        return Err(AnalysisError::BadPowerList);
    }
    for w in powers_w.windows(2) {
        if w[1] <= w[0] {
            return Err(AnalysisError::BadPowerList);
        }
    }

    let base_hash = scenario_hash(device, scenario_template);
    let cache: Mutex<HashMap<String, f64>> = Mutex::new(HashMap::new());

    let solve_one = |power: f64| -> Result<f64, AnalysisError> {
        let scenario = scenario_template.with_source_power(power)?;
        let key = scenario_hash(device, &scenario);
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return Ok(*t);
        }
        let bound = bind(device, &scenario)?;
        let probe = bound
            .probes
            .iter()
            .find(|p| p.name == probe_name)
            .ok_or_else(|| AnalysisError::UnknownProbe(probe_name.to_string()))?;
        let field = solve_steady_bound(device, &scenario, &bound, opts).map_err(|e| {
            AnalysisError::BadCurve(format!("steady solve failed at P = {power} W: {e}"))
        })?;
        let t = probe_voxels(&field, &probe.voxels, probe.statistic);
        cache.lock().unwrap().insert(key, t);
        Ok(t)
    };

    let mut temps: Vec<Option<Result<f64, AnalysisError>>> = Vec::new();
    temps.resize_with(powers_w.len(), || None);

    let workers = threads.max(1).min(powers_w.len());
    if workers <= 1 {
        for (i, &p) in powers_w.iter().enumerate() {
            temps[i] = Some(solve_one(p));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<f64, AnalysisError>>>> =
            (0..powers_w.len()).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= powers_w.len() {
                        break;
                    }
                    let result = solve_one(powers_w[i]);
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            temps[i] = slot.into_inner().unwrap();
        }
    }

    let mut samples = Vec::with_capacity(powers_w.len());
    for (i, t) in temps.into_iter().enumerate() {
        let t = t.expect("every sweep point produced")?;
        samples.push((powers_w[i], t));
    }
    PTCurve::new(samples, base_hash)
}

/// Finite-difference thermal resistance between consecutive sweep points,
/// in K/mW. Useful for monotonicity audits.
pub fn finite_difference_rth(curve: &PTCurve) -> Vec<f64> {
    curve
        .samples
        .windows(2)
        .map(|w| {
            let dp_mw = (w[1].0 - w[0].0) * 1e3;
            (w[1].1 - w[0].1) / dp_mw
        })
        .collect()
}

/// The default probe statistic for conversion curves: the sensor-region
/// volume average, with the heater maximum as the common companion probe.
pub fn default_probe_statistic() -> ProbeStatistic {
    ProbeStatistic::VolumeAverage
}
