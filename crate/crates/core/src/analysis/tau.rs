//! Thermal time-constant extraction from step-response traces.

use serde::Serialize;

use crate::error::AnalysisError;
use crate::solver::transient::TransientTrace;

/// Fraction of the trace tail used to establish the settled value.
const SETTLE_WINDOW: f64 = 0.05;
/// Settled when the tail window varies less than this fraction of the rise.
const SETTLE_TOLERANCE: f64 = 0.005;

/// Both time-constant estimates for one probe.
#[derive(Debug, Clone, Serialize)]
pub struct TimeConstants {
    /// First time the probe crosses 63.21% of the settled rise, linearly
    /// interpolated between samples. Primary estimate.
    pub crossing_s: f64,
    /// Slope of ln(1 - rise fraction) over the 10-90% rise window.
    /// Cross-check estimate.
    pub exponential_fit_s: f64,
    pub initial_k: f64,
    pub settled_k: f64,
    /// Set when the trace crossed the threshold more than once; the first
    /// crossing is reported.
    pub multiple_crossings: bool,
}

/// Extracts the thermal time constant of one probe series of a step
/// response.
pub fn extract_time_constant(
    trace: &TransientTrace,
    probe: &str,
) -> Result<TimeConstants, AnalysisError> {
    let series = trace
        .series_for(probe)
        .ok_or_else(|| AnalysisError::UnknownProbe(probe.to_string()))?;
    extract_from_series(&trace.times, series)
}

/// Same extraction on bare (time, value) arrays; useful for imported traces.
pub fn extract_from_series(times: &[f64], values: &[f64]) -> Result<TimeConstants, AnalysisError> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(AnalysisError::Unsettled(format!(
            "trace too short ({} samples)",
            times.len()
        )));
    }

    let t0 = values[0];
    let tail_start = ((times.len() as f64) * (1.0 - SETTLE_WINDOW)).floor() as usize;
    let tail = &values[tail_start.min(values.len() - 2)..];
    let settled = tail.iter().sum::<f64>() / tail.len() as f64;
    let delta = settled - t0;
    if delta.abs() < 1e-12 * t0.abs().max(1.0) {
        return Err(AnalysisError::ZeroRise);
    }

    let tail_spread = tail.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - tail.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if tail_spread > SETTLE_TOLERANCE * delta.abs() {
        return Err(AnalysisError::Unsettled(format!(
            "last {:.0}% of samples vary by {:.3e} K, more than {:.1}% of the {:.3e} K rise",
            SETTLE_WINDOW * 100.0,
            tail_spread,
            SETTLE_TOLERANCE * 100.0,
            delta
        )));
    }

    // Primary estimator: first crossing of the 1 - 1/e rise level.
    let threshold = t0 + (1.0 - (-1.0f64).exp()) * delta;
    let rising = delta > 0.0;
    let crossed = |v: f64| if rising { v >= threshold } else { v <= threshold };
    let mut crossing = None;
    let mut crossings = 0usize;
    let mut above = crossed(values[0]);
    for i in 1..values.len() {
        let now = crossed(values[i]);
        if now && !above {
            crossings += 1;
            if crossing.is_none() {
                let (ta, tb) = (times[i - 1], times[i]);
                let (va, vb) = (values[i - 1], values[i]);
                let frac = if vb != va { (threshold - va) / (vb - va) } else { 0.0 };
                crossing = Some(ta + frac * (tb - ta));
            }
        }
        above = now;
    }
    let crossing_s = crossing.ok_or_else(|| {
        AnalysisError::Unsettled("trace never reaches 63.2% of its settled rise".to_string())
    })?;

    // Secondary estimator: least-squares line through ln(1 - rise fraction)
    // over the 10-90% rise window.
    let mut ts = Vec::new();
    let mut ln_rem = Vec::new();
    for (t, v) in times.iter().zip(values) {
        let frac = (v - t0) / delta;
        if (0.10..=0.90).contains(&frac) {
            ts.push(*t);
            ln_rem.push((1.0 - frac).ln());
        }
    }
    if ts.len() < 2 {
        return Err(AnalysisError::Unsettled(
            "fewer than 2 samples inside the 10-90% rise window".to_string(),
        ));
    }
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_l = ln_rem.iter().sum::<f64>() / n;
    let (mut stt, mut stl) = (0.0, 0.0);
    for (t, l) in ts.iter().zip(&ln_rem) {
        stt += (t - mean_t) * (t - mean_t);
        stl += (t - mean_t) * (l - mean_l);
    }
    let slope = stl / stt;
    if !(slope < 0.0) {
        return Err(AnalysisError::Unsettled(
            "rise window is not exponential-like (non-negative log slope)".to_string(),
        ));
    }

    Ok(TimeConstants {
        crossing_s,
        exponential_fit_s: -1.0 / slope,
        initial_k: t0,
        settled_k: settled,
        multiple_crossings: crossings > 1,
    })
}
