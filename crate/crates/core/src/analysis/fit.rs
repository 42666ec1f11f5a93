//! Least-squares fits: the quadratic power-to-temperature conversion curve
//! and the linear sensor calibration.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

/// A power-to-temperature curve: ordered (P, T) samples with powers in
/// watts internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PTCurve {
    /// (power W, temperature K), strictly increasing in power.
    pub samples: Vec<(f64, f64)>,
    /// Hash of the scenario that produced the curve, or "imported".
    pub provenance: String,
}

impl PTCurve {
    pub fn new(samples: Vec<(f64, f64)>, provenance: String) -> Result<Self, AnalysisError> {
        if samples.is_empty() {
            return Err(AnalysisError::BadPowerList);
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(AnalysisError::BadCurve(format!(
                    "powers must be strictly increasing ({} W then {} W)",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|(p, _)| *p < 0.0) {
            return Err(AnalysisError::BadCurve("powers must be non-negative".into()));
        }
        Ok(Self { samples, provenance })
    }
}

/// T(P) = c0 + c1·P + c2·P² with P in milliwatts, so coefficients compare
/// digit for digit against reported conversion characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    /// K
    pub c0: f64,
    /// K/mW
    pub c1: f64,
    /// K/mW²
    pub c2: f64,
    /// Root-mean-square residual of the fit, K.
    pub residual_rms: f64,
}

impl QuadraticFit {
    /// Evaluates the fit at a power given in milliwatts.
    pub fn evaluate_mw(&self, p_mw: f64) -> f64 {
        self.c0 + self.c1 * p_mw + self.c2 * p_mw * p_mw
    }
}

/// Solves a dense symmetric 3x3 system by Gaussian elimination with partial
/// pivoting. Small enough to keep inline.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Ordinary least squares of y on [1, x, x²].
///
/// The abscissae are centered and scaled before forming the normal
/// equations, and the coefficients mapped back, so wide power ranges do not
/// lose precision. Returns (c0, c1, c2, residual_rms) in the original units.
pub fn fit_polynomial2(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64), AnalysisError> {
    assert_eq!(xs.len(), ys.len());
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(AnalysisError::QuadraticRankDeficient(distinct.len()));
    }

    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let scale = xs
        .iter()
        .map(|x| (x - mean).abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let u: Vec<f64> = xs.iter().map(|x| (x - mean) / scale).collect();
    let mut s = [0.0f64; 5]; // sums of u^0..u^4
    let mut t = [0.0f64; 3]; // sums of y*u^0..y*u^2
    for (ui, yi) in u.iter().zip(ys) {
        let u2 = ui * ui;
        s[0] += 1.0;
        s[1] += ui;
        s[2] += u2;
        s[3] += u2 * ui;
        s[4] += u2 * u2;
        t[0] += yi;
        t[1] += yi * ui;
        t[2] += yi * u2;
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let coeffs = solve3(a, t).ok_or(AnalysisError::QuadraticRankDeficient(distinct.len()))?;
    let [a0, a1, a2] = coeffs;

    // Map back: y = a0 + a1 (x-m)/s + a2 ((x-m)/s)^2.
    let c2 = a2 / (scale * scale);
    let c1 = a1 / scale - 2.0 * a2 * mean / (scale * scale);
    let c0 = a0 - a1 * mean / scale + a2 * mean * mean / (scale * scale);

    let ss: f64 = u
        .iter()
        .zip(ys)
        .map(|(ui, yi)| {
            let pred = a0 + a1 * ui + a2 * ui * ui;
            (yi - pred) * (yi - pred)
        })
        .sum();
    let rms = (ss / n).sqrt();
    Ok((c0, c1, c2, rms))
}

/// Fits the quadratic conversion characteristic to a P-T curve. Powers are
/// converted to milliwatts so the coefficients land in K, K/mW, K/mW².
pub fn fit_quadratic(curve: &PTCurve) -> Result<QuadraticFit, AnalysisError> {
    let xs: Vec<f64> = curve.samples.iter().map(|(p, _)| p * 1e3).collect();
    let ys: Vec<f64> = curve.samples.iter().map(|(_, t)| *t).collect();
    let (c0, c1, c2, residual_rms) = fit_polynomial2(&xs, &ys)?;
    Ok(QuadraticFit { c0, c1, c2, residual_rms })
}

/// Thermal resistance ∂T/∂P of a fitted conversion curve at a power in
/// milliwatts, in K/mW.
pub fn thermal_resistance(fit: &QuadraticFit, p_mw: f64) -> f64 {
    fit.c1 + 2.0 * fit.c2 * p_mw
}

/// Linear sensor calibration V = slope·T + intercept at a fixed bias
/// current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    /// V/K
    pub slope: f64,
    /// V
    pub intercept: f64,
    /// A
    pub bias_current: f64,
    /// Root-mean-square residual, V.
    pub residual_rms: f64,
}

/// Least-squares line through (T, V) samples.
pub fn fit_linear_calibration(
    samples: &[(f64, f64)],
    bias_current: f64,
) -> Result<CalibrationCurve, AnalysisError> {
    let mut distinct: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(AnalysisError::LinearRankDeficient(distinct.len()));
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_v = samples.iter().map(|(_, v)| v).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, v) in samples {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (v - mean_v);
    }
    let slope = sxy / sxx;
    let intercept = mean_v - slope * mean_t;
    let ss: f64 = samples
        .iter()
        .map(|(t, v)| {
            let r = v - (slope * t + intercept);
            r * r
        })
        .sum();
    Ok(CalibrationCurve {
        slope,
        intercept,
        bias_current,
        residual_rms: (ss / n).sqrt(),
    })
}

/// Inverts a calibration curve: temperature for a measured sensor voltage.
pub fn voltage_to_temperature(cal: &CalibrationCurve, v: f64) -> Result<f64, AnalysisError> {
    if cal.slope == 0.0 || !cal.slope.is_finite() {
        return Err(AnalysisError::ZeroSlope);
    }
    Ok((v - cal.intercept) / cal.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPORTED: (f64, f64, f64) = (305.23, 10.297, 0.262);

    fn lattice_curve() -> PTCurve {
        let samples: Vec<(f64, f64)> = [0.0, 5.0, 10.0, 15.0, 20.0]
            .iter()
            .map(|p_mw| {
                let t = REPORTED.0 + REPORTED.1 * p_mw + REPORTED.2 * p_mw * p_mw;
                (p_mw * 1e-3, t)
            })
            .collect();
        PTCurve::new(samples, "imported".into()).unwrap()
    }

    #[test]
    fn recovers_reported_conversion_coefficients() {
        let fit = fit_quadratic(&lattice_curve()).unwrap();
        assert!((fit.c0 - REPORTED.0).abs() < 1e-9, "c0 {}", fit.c0);
        assert!((fit.c1 - REPORTED.1).abs() < 1e-9, "c1 {}", fit.c1);
        assert!((fit.c2 - REPORTED.2).abs() < 1e-9, "c2 {}", fit.c2);
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn constant_samples_fit_flat() {
        let samples: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 1e-3, 300.0)).collect();
        let curve = PTCurve::new(samples, "imported".into()).unwrap();
        let fit = fit_quadratic(&curve).unwrap();
        assert!((fit.c0 - 300.0).abs() < 1e-10);
        assert!(fit.c1.abs() < 1e-10);
        assert!(fit.c2.abs() < 1e-10);
    }

    #[test]
    fn matches_raw_normal_equation_oracle() {
        // Independent oracle: unscaled normal equations on the raw powers.
        let xs: Vec<f64> = (0..9).map(|i| 0.7 + 1.3 * i as f64).collect();
        // Messy but cubic-free data.
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.5 - 1.75 * x + 0.31 * x * x + if i % 2 == 0 { 0.013 } else { -0.017 })
            .collect();
        let (c0, c1, c2, _) = fit_polynomial2(&xs, &ys).unwrap();

        let n = xs.len() as f64;
        let s1: f64 = xs.iter().sum();
        let s2: f64 = xs.iter().map(|x| x * x).sum();
        let s3: f64 = xs.iter().map(|x| x * x * x).sum();
        let s4: f64 = xs.iter().map(|x| x * x * x * x).sum();
        let t0: f64 = ys.iter().sum();
        let t1: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let t2: f64 = xs.iter().zip(&ys).map(|(x, y)| x * x * y).sum();
        let oracle = solve3([[n, s1, s2], [s1, s2, s3], [s2, s3, s4]], [t0, t1, t2]).unwrap();

        assert!((c0 - oracle[0]).abs() < 1e-8, "{c0} vs {}", oracle[0]);
        assert!((c1 - oracle[1]).abs() < 1e-8, "{c1} vs {}", oracle[1]);
        assert!((c2 - oracle[2]).abs() < 1e-8, "{c2} vs {}", oracle[2]);
    }

    #[test]
    fn rank_deficiency_is_rejected() {
        let curve = PTCurve::new(vec![(0.0, 300.0), (1e-3, 320.0)], "imported".into()).unwrap();
        assert!(matches!(
            fit_quadratic(&curve),
            Err(AnalysisError::QuadraticRankDeficient(2))
        ));
    }

    #[test]
    fn residual_is_the_least_squares_minimum() {
        let xs: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 0.5 * x + 0.05 * x * x + (x * 1.7).sin() * 0.01).collect();
        let (c0, c1, c2, rms) = fit_polynomial2(&xs, &ys).unwrap();
        let rms_of = |a0: f64, a1: f64, a2: f64| {
            let ss: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let r = y - (a0 + a1 * x + a2 * x * x);
                    r * r
                })
                .sum();
            (ss / xs.len() as f64).sqrt()
        };
        for da in [-1e-3, 0.0, 1e-3] {
            for db in [-1e-3, 0.0, 1e-3] {
                for dc in [-1e-4, 0.0, 1e-4] {
                    assert!(rms_of(c0 + da, c1 + db, c2 + dc) + 1e-15 >= rms);
                }
            }
        }
    }

    #[test]
    fn thermal_resistance_reported_values() {
        let fit = QuadraticFit { c0: 305.23, c1: 10.297, c2: 0.262, residual_rms: 0.0 };
        let rth_20 = thermal_resistance(&fit, 20.0);
        assert!((rth_20 - 20.777).abs() < 1e-3, "{rth_20}");
        assert!((rth_20 - 21.0).abs() / 21.0 < 0.02); // "almost 21 K/mW"
        assert!((thermal_resistance(&fit, 0.0) - 10.297).abs() < 1e-12);
        let linear = QuadraticFit { c0: 300.0, c1: 5.0, c2: 0.0, residual_rms: 0.0 };
        assert_eq!(thermal_resistance(&linear, 7.5), 5.0);
    }

    #[test]
    fn thermal_resistance_is_the_fit_derivative() {
        let fit = QuadraticFit { c0: 305.23, c1: 10.297, c2: 0.262, residual_rms: 0.0 };
        for p in [0.0, 2.0, 10.0, 20.0] {
            let dp = 1e-6;
            let fd = (fit.evaluate_mw(p + dp) - fit.evaluate_mw(p - dp)) / (2.0 * dp);
            let analytic = thermal_resistance(&fit, p);
            assert!(((fd - analytic) / analytic).abs() < 1e-6, "P={p}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn fit_is_idempotent_on_its_own_predictions() {
        let fit = fit_quadratic(&lattice_curve()).unwrap();
        let refit_samples: Vec<(f64, f64)> = lattice_curve()
            .samples
            .iter()
            .map(|(p, _)| (*p, fit.evaluate_mw(p * 1e3)))
            .collect();
        let refit = fit_quadratic(&PTCurve::new(refit_samples, "imported".into()).unwrap()).unwrap();
        assert!((fit.c0 - refit.c0).abs() < 1e-12);
        assert!((fit.c1 - refit.c1).abs() < 1e-12);
        assert!((fit.c2 - refit.c2).abs() < 1e-12);
    }

    #[test]
    fn unit_scaling_covariance() {
        // Fitting against powers expressed in W scales c1 by 1e3 and c2 by
        // 1e6 while predictions at equal physical power are unchanged.
        let curve = lattice_curve();
        let xs_mw: Vec<f64> = curve.samples.iter().map(|(p, _)| p * 1e3).collect();
        let xs_w: Vec<f64> = curve.samples.iter().map(|(p, _)| *p).collect();
        let ys: Vec<f64> = curve.samples.iter().map(|(_, t)| *t).collect();
        let (c0m, c1m, c2m, _) = fit_polynomial2(&xs_mw, &ys).unwrap();
        let (c0w, c1w, c2w, _) = fit_polynomial2(&xs_w, &ys).unwrap();
        assert!((c0m - c0w).abs() < 1e-9 * c0m.abs());
        assert!((c1w - c1m * 1e3).abs() < 1e-9 * c1w.abs());
        assert!((c2w - c2m * 1e6).abs() < 1e-9 * c2w.abs());
        for p_w in [0.0, 5e-3, 20e-3] {
            let t_m = c0m + c1m * (p_w * 1e3) + c2m * (p_w * 1e3) * (p_w * 1e3);
            let t_w = c0w + c1w * p_w + c2w * p_w * p_w;
            assert!(((t_m - t_w) / t_w).abs() < 1e-9);
        }
    }

    #[test]
    fn calibration_recovers_exact_line() {
        let samples: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let t = 300.0 + 50.0 * i as f64;
                (t, 0.001 * t + 0.2)
            })
            .collect();
        let cal = fit_linear_calibration(&samples, 1e-3).unwrap();
        assert!((cal.slope - 0.001).abs() < 1e-12);
        assert!((cal.intercept - 0.2).abs() < 1e-12);
        assert!(cal.residual_rms < 1e-12);
        assert_eq!(cal.bias_current, 1e-3);
    }

    #[test]
    fn two_points_interpolate() {
        let cal = fit_linear_calibration(&[(300.0, 0.5), (400.0, 0.7)], 1e-3).unwrap();
        assert!((cal.slope - 0.002).abs() < 1e-12);
        assert!((cal.intercept - -0.1).abs() < 1e-12);
    }

    #[test]
    fn noisy_line_matches_closed_form_oracle() {
        let samples: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t = 300.0 + 25.0 * i as f64;
                let noise = if i % 2 == 0 { 1e-4 } else { -1.3e-4 };
                (t, 0.0012 * t + 0.15 + noise)
            })
            .collect();
        let cal = fit_linear_calibration(&samples, 1e-3).unwrap();
        // Closed-form slope/intercept through raw sums.
        let n = samples.len() as f64;
        let sx: f64 = samples.iter().map(|(t, _)| t).sum();
        let sy: f64 = samples.iter().map(|(_, v)| v).sum();
        let sxx: f64 = samples.iter().map(|(t, _)| t * t).sum();
        let sxy: f64 = samples.iter().map(|(t, v)| t * v).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        assert!((cal.slope - slope).abs() < 1e-10);
        assert!((cal.intercept - intercept).abs() < 1e-10);
    }

    #[test]
    fn voltage_inversion_round_trips() {
        let cal = CalibrationCurve { slope: 0.001, intercept: 0.2, bias_current: 1e-3, residual_rms: 0.0 };
        assert!((voltage_to_temperature(&cal, 0.5).unwrap() - 300.0).abs() < 1e-12);
        for t in [250.0, 300.0, 423.0, 650.0] {
            let v = cal.slope * t + cal.intercept;
            let back = voltage_to_temperature(&cal, v).unwrap();
            assert!((back - t).abs() < 1e-12 * t);
        }
        let degenerate = CalibrationCurve { slope: 0.0, ..cal };
        assert!(matches!(
            voltage_to_temperature(&degenerate, 0.5),
            Err(AnalysisError::ZeroSlope)
        ));
    }

    #[test]
    fn single_temperature_calibration_is_rejected() {
        assert!(matches!(
            fit_linear_calibration(&[(300.0, 0.5), (300.0, 0.6)], 1e-3),
            Err(AnalysisError::LinearRankDeficient(1))
        ));
    }
}
