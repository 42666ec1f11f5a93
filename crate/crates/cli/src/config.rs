//! Run-configuration file for the CLI: paths to the device/material/scenario
//! configs plus per-command parameters. Paths inside the file resolve
//! relative to the file's own directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use mtc_core::config as core_config;
use mtc_core::model::{build_grid, Device, HotplateSpec, Resolution, ScenarioSpec};
use mtc_core::solver::{CgOptions, SolverOptions};
use mtc_core::units::{parse_current, parse_power, parse_time};

use crate::exit::CliError;

#[derive(Debug, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub device: Option<String>,
    #[serde(default)]
    pub materials: Option<String>,
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub resolution: Option<serde_json::Value>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub steady: Option<SteadySection>,
    #[serde(default)]
    pub transient: Option<TransientSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub calibrate: Option<CalibrateSection>,
    #[serde(default)]
    pub report: Option<ReportSection>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    pub cg_rel_tol: f64,
    pub cg_max_iter_factor: usize,
    pub picard_tol_k: f64,
    pub picard_max_iter: usize,
    pub picard_damping: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            cg_rel_tol: d.cg.rel_tol,
            cg_max_iter_factor: d.cg.max_iter_factor,
            picard_tol_k: d.picard_tol,
            picard_max_iter: d.picard_max_iter,
            picard_damping: d.picard_damping,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
pub struct SteadySection {
    #[serde(default = "default_true")]
    pub write_field: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
pub struct TransientSection {
    pub t_end: String,
    pub dt: String,
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Debug, Deserialize, Default)]
pub struct SweepSection {
    #[serde(default)]
    pub powers: Vec<String>,
    #[serde(default)]
    pub probe: Option<String>,
    #[serde(default)]
    pub rth_at: Vec<String>,
    /// Fit an imported P-T CSV instead of simulating.
    #[serde(default)]
    pub input_csv: Option<String>,
    #[serde(default)]
    pub emit_gnuplot: bool,
}

#[derive(Debug, Deserialize)]
pub struct CalibrateSection {
    pub samples_csv: String,
    pub bias_current: String,
    /// Optional voltage column to invert through the fitted curve.
    #[serde(default)]
    pub voltages_csv: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct ReportSection {
    pub fit_json: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default = "default_target")]
    pub target_temperature_k: f64,
    #[serde(default = "default_audit_power")]
    pub audit_power: String,
}

fn default_target() -> f64 {
    600.0
}

fn default_audit_power() -> String {
    "20mW".to_string()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let s = &self.solver;
        if !(s.cg_rel_tol > 0.0) || !(s.picard_tol_k > 0.0) {
            return Err(CliError::parse("solver tolerances must be positive"));
        }
        if !(s.picard_damping > 0.0 && s.picard_damping <= 1.0) {
            return Err(CliError::parse("picard_damping must be in (0, 1]"));
        }
        Ok(SolverOptions {
            cg: CgOptions {
                rel_tol: s.cg_rel_tol,
                max_iter_factor: s.cg_max_iter_factor,
            },
            picard_tol: s.picard_tol_k,
            picard_max_iter: s.picard_max_iter,
            picard_damping: s.picard_damping,
        })
    }

    fn require<'a>(&self, field: &'a Option<String>, name: &str) -> Result<&'a str, CliError> {
        field
            .as_deref()
            .ok_or_else(|| CliError::parse(format!("run config is missing {name:?}")))
    }

    /// Loads and validates the device, materials and scenario, and realizes
    /// the grid.
    pub fn build_device(&self) -> Result<(Device, ScenarioSpec, HotplateSpec), CliError> {
        let materials_path = self.resolve(self.require(&self.materials, "materials")?);
        let device_path = self.resolve(self.require(&self.device, "device")?);
        let scenario_path = self.resolve(self.require(&self.scenario, "scenario")?);

        let materials = core_config::load_materials(&materials_path).map_err(CliError::from_parse)?;
        let spec = core_config::load_device(&device_path).map_err(CliError::from_parse)?;
        let scenario = core_config::load_scenario(&scenario_path).map_err(CliError::from_parse)?;
        let resolution = self.resolution()?;
        let device =
            build_grid(&spec, &materials, resolution).map_err(|e| CliError::parse(e.to_string()))?;
        Ok((device, scenario, spec))
    }

    pub fn resolution(&self) -> Result<Resolution, CliError> {
        let value = self
            .resolution
            .as_ref()
            .ok_or_else(|| CliError::parse("run config is missing \"resolution\""))?;
        core_config::resolution_from_json(value, &self.base_dir).map_err(CliError::from_parse)
    }

    pub fn transient_params(&self) -> Result<(f64, f64, usize), CliError> {
        let section = self
            .transient
            .as_ref()
            .ok_or_else(|| CliError::parse("run config is missing \"transient\""))?;
        let t_end = parse_time(&section.t_end).map_err(CliError::from_parse)?;
        let dt = parse_time(&section.dt).map_err(CliError::from_parse)?;
        if !(dt > 0.0) {
            return Err(CliError::parse(format!("transient dt must be positive (got {dt} s)")));
        }
        if !(t_end > 0.0) || t_end < dt {
            return Err(CliError::parse(format!(
                "transient t_end must be at least one step (t_end {t_end} s, dt {dt} s)"
            )));
        }
        Ok((t_end, dt, section.snapshot_every))
    }

    pub fn sweep_powers(&self) -> Result<Vec<f64>, CliError> {
        let section = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::parse("run config is missing \"sweep\""))?;
        section
            .powers
            .iter()
            .map(|p| parse_power(p).map_err(CliError::from_parse))
            .collect()
    }

    pub fn rth_powers_mw(&self) -> Result<Vec<f64>, CliError> {
        let section = self.sweep.as_ref();
        let report_defaults = vec![0.0, 20.0];
        match section {
            Some(s) if !s.rth_at.is_empty() => s
                .rth_at
                .iter()
                .map(|p| parse_power(p).map(|w| w * 1e3).map_err(CliError::from_parse))
                .collect(),
            _ => Ok(report_defaults),
        }
    }

    pub fn bias_current(&self) -> Result<f64, CliError> {
        let section = self
            .calibrate
            .as_ref()
            .ok_or_else(|| CliError::parse("run config is missing \"calibrate\""))?;
        parse_current(&section.bias_current).map_err(CliError::from_parse)
    }
}

/// Worker cap for internally parallel operations, from MTCSIM_THREADS.
/// Defaults to 1; results are bit-identical at any setting.
pub fn thread_cap() -> usize {
    std::env::var("MTCSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n >= 1)
        .unwrap_or(1)
}
