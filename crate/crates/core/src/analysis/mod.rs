//! Figures of merit: P-T conversion fits, thermal resistance, sensor
//! calibration and time-constant extraction.

pub mod fit;
pub mod sweep;
pub mod tau;

pub use fit::{
    fit_linear_calibration, fit_polynomial2, fit_quadratic, thermal_resistance,
    voltage_to_temperature, CalibrationCurve, PTCurve, QuadraticFit,
};
pub use sweep::{finite_difference_rth, power_sweep};
pub use tau::{extract_from_series, extract_time_constant, TimeConstants};
