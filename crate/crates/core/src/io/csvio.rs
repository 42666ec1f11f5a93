//! CSV import/export for traces, P-T curves and calibration samples.
//!
//! Headers are part of the contract:
//!   traces        `t_seconds,<probe names...>`
//!   P-T curves    `power_mw,temperature_k`
//!   calibration   `temperature_k,voltage_v`
//!   voltages      `voltage_v` (input) -> `voltage_v,temperature_k` (output)

use std::io::{Read, Write};

use crate::analysis::fit::PTCurve;
use crate::error::AnalysisError;
use crate::solver::transient::TransientTrace;

fn bad(msg: impl Into<String>) -> AnalysisError {
    AnalysisError::BadCurve(msg.into())
}

/// Writes a probe trace with one column per probe.
pub fn write_trace<W: Write>(out: W, trace: &TransientTrace) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_seconds".to_string()];
    header.extend(trace.probe_names.iter().cloned());
    w.write_record(&header).map_err(|e| bad(e.to_string()))?;
    for (i, t) in trace.times.iter().enumerate() {
        let mut record = vec![t.to_string()];
        for series in &trace.series {
            record.push(series[i].to_string());
        }
        w.write_record(&record).map_err(|e| bad(e.to_string()))?;
    }
    w.flush().map_err(|e| bad(e.to_string()))?;
    Ok(())
}

/// Reads a probe trace written by [`write_trace`]. Returns times and one
/// (name, series) pair per probe.
pub fn read_trace<R: Read>(input: R) -> Result<(Vec<f64>, Vec<(String, Vec<f64>)>), AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.is_empty() || &header[0] != "t_seconds" {
        return Err(bad("trace CSV must start with a t_seconds column"));
    }
    let names: Vec<String> = header.iter().skip(1).map(|s| s.to_string()).collect();
    let mut times = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != names.len() + 1 {
            return Err(bad("trace CSV row width does not match header"));
        }
        times.push(parse_cell(&record[0])?);
        for (k, slot) in series.iter_mut().enumerate() {
            slot.push(parse_cell(&record[k + 1])?);
        }
    }
    Ok((times, names.into_iter().zip(series).collect()))
}

fn parse_cell(s: &str) -> Result<f64, AnalysisError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| bad(format!("cannot parse {s:?} as a number")))
}

/// Writes a P-T curve with powers in milliwatts.
pub fn write_pt_curve<W: Write>(out: W, curve: &PTCurve) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["power_mw", "temperature_k"])
        .map_err(|e| bad(e.to_string()))?;
    for (p_w, t) in &curve.samples {
        w.write_record([(p_w * 1e3).to_string(), t.to_string()])
            .map_err(|e| bad(e.to_string()))?;
    }
    w.flush().map_err(|e| bad(e.to_string()))?;
    Ok(())
}

/// Reads a P-T curve written by [`write_pt_curve`] (or measured data using
/// the same header). The provenance is marked "imported".
pub fn read_pt_curve<R: Read>(input: R) -> Result<PTCurve, AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "power_mw" || &header[1] != "temperature_k" {
        return Err(bad("P-T CSV must have header power_mw,temperature_k"));
    }
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let p_mw = parse_cell(&record[0])?;
        let t = parse_cell(&record[1])?;
        samples.push((p_mw * 1e-3, t));
    }
    PTCurve::new(samples, "imported".to_string())
}

/// Reads (temperature K, voltage V) calibration samples.
pub fn read_calibration_samples<R: Read>(input: R) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "temperature_k" || &header[1] != "voltage_v" {
        return Err(bad("calibration CSV must have header temperature_k,voltage_v"));
    }
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        samples.push((parse_cell(&record[0])?, parse_cell(&record[1])?));
    }
    Ok(samples)
}

/// Reads a single `voltage_v` column.
pub fn read_voltages<R: Read>(input: R) -> Result<Vec<f64>, AnalysisError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.is_empty() || &header[0] != "voltage_v" {
        return Err(bad("voltage CSV must have header voltage_v"));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        out.push(parse_cell(&record[0])?);
    }
    Ok(out)
}

/// Writes voltages alongside their inverted temperatures.
pub fn write_voltage_temperatures<W: Write>(
    out: W,
    rows: &[(f64, f64)],
) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["voltage_v", "temperature_k"])
        .map_err(|e| bad(e.to_string()))?;
    for (v, t) in rows {
        w.write_record([v.to_string(), t.to_string()])
            .map_err(|e| bad(e.to_string()))?;
    }
    w.flush().map_err(|e| bad(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pt_curve_round_trips() {
        let curve = PTCurve::new(
            vec![(0.0, 300.0), (5e-3, 362.26), (10e-3, 434.4)],
            "abc123".to_string(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_pt_curve(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("power_mw,temperature_k\n"));
        let back = read_pt_curve(buf.as_slice()).unwrap();
        assert_eq!(back.samples, curve.samples);
        assert_eq!(back.provenance, "imported");
    }

    #[test]
    fn trace_round_trips() {
        let trace = TransientTrace {
            times: vec![0.0, 1e-5, 2e-5],
            probe_names: vec!["heater_max".into(), "sensor_avg".into()],
            series: vec![vec![300.0, 301.5, 302.25], vec![300.0, 300.5, 300.75]],
            dt: 1e-5,
            scheme: "backward-euler",
            scenario_hash: "h".into(),
            completed: true,
            snapshots: vec![],
            final_field: None,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_seconds,heater_max,sensor_avg\n"));
        let (times, series) = read_trace(buf.as_slice()).unwrap();
        assert_eq!(times, trace.times);
        assert_eq!(series[0].0, "heater_max");
        assert_eq!(series[1].1, trace.series[1]);
    }

    #[test]
    fn wrong_headers_are_rejected() {
        assert!(read_pt_curve("p,t\n1,2\n".as_bytes()).is_err());
        assert!(read_calibration_samples("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_voltages("volts\n1\n".as_bytes()).is_err());
    }
}
