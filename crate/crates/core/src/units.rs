//! Unit-suffixed quantity parsing.
//!
//! Config files carry dimensioned values as strings with an explicit unit
//! suffix ("150um", "500nm", "1mW", "20us", "1mA"). Everything is converted
//! to SI at parse time; the rest of the crate works in meters, watts,
//! seconds, amperes and kelvin only.

use crate::error::ConfigError;

/// Nanometers per meter; device geometry is quantized to integer nanometers
/// so that feature boundaries can be snapped to voxel boundaries exactly.
pub const NM_PER_M: f64 = 1e9;

fn parse_with_units(s: &str, kind: &str, table: &[(&str, f64)]) -> Result<f64, ConfigError> {
    let trimmed = s.trim();
    let err = || ConfigError::BadQuantity {
        kind: kind.to_string(),
        text: s.to_string(),
    };
    // Longest matching suffix wins so "mm" is not read as "m"; the numeric
    // prefix may itself contain an exponent ("1.5e-6m").
    let mut candidates: Vec<&(&str, f64)> = table.iter().collect();
    candidates.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (unit, scale) in candidates {
        if let Some(prefix) = trimmed.strip_suffix(unit) {
            if let Ok(value) = prefix.trim().parse::<f64>() {
                let si = value * scale;
                if si.is_finite() {
                    return Ok(si);
                }
            }
        }
    }
    Err(err())
}

/// Parses a length with unit suffix into meters. Accepted: m, mm, um/µm, nm.
pub fn parse_length(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(
        s,
        "length",
        &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9)],
    )
}

/// Parses a power with unit suffix into watts. Accepted: W, mW, uW/µW, nW.
pub fn parse_power(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(
        s,
        "power",
        &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("µW", 1e-6), ("nW", 1e-9)],
    )
}

/// Parses a time with unit suffix into seconds. Accepted: s, ms, us/µs, ns.
pub fn parse_time(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(
        s,
        "time",
        &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("ns", 1e-9)],
    )
}

/// Parses a current with unit suffix into amperes. Accepted: A, mA, uA/µA.
pub fn parse_current(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(s, "current", &[("A", 1.0), ("mA", 1e-3), ("uA", 1e-6), ("µA", 1e-6)])
}

/// Rounds a length in meters to integer nanometers.
///
/// Grid construction does all geometry arithmetic on integer nanometers so
/// that boundary snapping is exact and bit-reproducible.
pub fn to_nm(len_m: f64) -> i64 {
    (len_m * NM_PER_M).round() as i64
}

/// Converts integer nanometers back to meters.
pub fn nm_to_m(nm: i64) -> f64 {
    nm as f64 / NM_PER_M
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 2.0 * f64::EPSILON * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn lengths_with_suffixes() {
        close(parse_length("150um").unwrap(), 150e-6);
        close(parse_length("500nm").unwrap(), 500e-9);
        close(parse_length("2 um").unwrap(), 2e-6);
        close(parse_length("0.5mm").unwrap(), 0.5e-3);
        close(parse_length("1.5e-6m").unwrap(), 1.5e-6);
    }

    #[test]
    fn rejects_missing_or_unknown_suffix() {
        assert!(parse_length("150").is_err());
        assert!(parse_length("150kg").is_err());
        assert!(parse_power("1").is_err());
        assert!(parse_time("20").is_err());
    }

    #[test]
    fn powers_times_currents() {
        close(parse_power("1mW").unwrap(), 1e-3);
        close(parse_power("20mW").unwrap(), 20e-3);
        close(parse_time("20us").unwrap(), 20e-6);
        close(parse_time("1.5ms").unwrap(), 1.5e-3);
        close(parse_current("1mA").unwrap(), 1e-3);
    }

    #[test]
    fn nanometer_quantization_round_trips() {
        assert_eq!(to_nm(150e-6), 150_000);
        assert_eq!(to_nm(parse_length("500nm").unwrap()), 500);
        assert_eq!(nm_to_m(150_000), 150e-6);
    }
}
