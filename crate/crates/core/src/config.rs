//! JSON config schemas for device, material and scenario files.
//!
//! Dimensioned values are strings with unit suffixes ("150um", "1mW");
//! temperatures are plain kelvin numbers. Unknown fields (notes, provenance
//! remarks) are ignored, so config files can document themselves.

use std::path::Path;

use serde::Deserialize;

use crate::error::ConfigError;
use crate::model::grid::Region;
use crate::model::hotplate::{HotplateSpec, LayerSpec, PlateRect, Resolution};
use crate::model::material::{ConductivityModel, ConductivityTable, Material, MaterialTable};
use crate::model::scenario::{
    AmbientMode, BoundaryCondition, GridFace, HeatSource, Probe, ProbeStatistic, RegionRef,
    ScenarioSpec,
};
use crate::units::{parse_length, parse_power};

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Json {
        path: path.display().to_string(),
        source: e,
    })
}

// ---------------------------------------------------------------------------
// Materials

#[derive(Deserialize)]
struct MaterialsFile {
    materials: Vec<MaterialEntry>,
}

#[derive(Deserialize)]
struct MaterialEntry {
    name: String,
    conductivity: ConductivityEntry,
    /// J/(m³·K)
    volumetric_heat_capacity: f64,
    #[serde(default)]
    #[allow(dead_code)]
    provenance: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConductivityEntry {
    /// W/(m·K)
    Constant(f64),
    /// [[T kelvin, k], ...]
    Table(Vec<(f64, f64)>),
}

pub fn materials_from_str(text: &str, origin: &Path) -> Result<MaterialTable, ConfigError> {
    let file: MaterialsFile = from_json(text, origin)?;
    let mut materials = Vec::with_capacity(file.materials.len());
    for entry in file.materials {
        let conductivity = match entry.conductivity {
            ConductivityEntry::Constant(k) => ConductivityModel::Constant(k),
            ConductivityEntry::Table(points) => ConductivityModel::Table(
                ConductivityTable::new(points).map_err(|reason| ConfigError::InvalidMaterial {
                    name: entry.name.clone(),
                    reason,
                })?,
            ),
        };
        materials.push(Material {
            name: entry.name,
            conductivity,
            volumetric_heat_capacity: entry.volumetric_heat_capacity,
        });
    }
    MaterialTable::new(materials)
}

pub fn load_materials(path: &Path) -> Result<MaterialTable, ConfigError> {
    materials_from_str(&read_file(path)?, path)
}

// ---------------------------------------------------------------------------
// Device

#[derive(Deserialize)]
struct DeviceFile {
    island_width: String,
    island_length: String,
    plate_thickness: String,
    #[serde(default = "default_bridge_count")]
    bridge_count: u8,
    bridge_length: String,
    bridge_width: String,
    frame_width: String,
    frame_thickness: String,
    island_material: String,
    #[serde(default)]
    bridge_material: Option<String>,
    #[serde(default)]
    frame_material: Option<String>,
    #[serde(default)]
    layer_stack: Vec<LayerEntry>,
    heater_region: PlateRectEntry,
    sensor_region: PlateRectEntry,
}

fn default_bridge_count() -> u8 {
    4
}

#[derive(Deserialize)]
struct LayerEntry {
    material: String,
    thickness: String,
}

#[derive(Deserialize)]
struct PlateRectEntry {
    #[serde(default)]
    offset_x: Option<String>,
    #[serde(default)]
    offset_y: Option<String>,
    width: String,
    length: String,
}

impl PlateRectEntry {
    fn resolve(&self) -> Result<PlateRect, ConfigError> {
        let off = |o: &Option<String>| -> Result<f64, ConfigError> {
            o.as_deref().map(parse_length).transpose().map(|v| v.unwrap_or(0.0))
        };
        Ok(PlateRect {
            offset: [off(&self.offset_x)?, off(&self.offset_y)?],
            width: parse_length(&self.width)?,
            length: parse_length(&self.length)?,
        })
    }
}

pub fn device_from_str(text: &str, origin: &Path) -> Result<HotplateSpec, ConfigError> {
    let file: DeviceFile = from_json(text, origin)?;
    let island_material = file.island_material.clone();
    Ok(HotplateSpec {
        island_width: parse_length(&file.island_width)?,
        island_length: parse_length(&file.island_length)?,
        plate_thickness: parse_length(&file.plate_thickness)?,
        bridge_count: file.bridge_count,
        bridge_length: parse_length(&file.bridge_length)?,
        bridge_width: parse_length(&file.bridge_width)?,
        frame_width: parse_length(&file.frame_width)?,
        frame_thickness: parse_length(&file.frame_thickness)?,
        bridge_material: file.bridge_material.unwrap_or_else(|| island_material.clone()),
        frame_material: file.frame_material.unwrap_or_else(|| island_material.clone()),
        island_material,
        layer_stack: file
            .layer_stack
            .iter()
            .map(|l| {
                Ok(LayerSpec {
                    material: l.material.clone(),
                    thickness: parse_length(&l.thickness)?,
                })
            })
            .collect::<Result<_, ConfigError>>()?,
        heater_region: file.heater_region.resolve()?,
        sensor_region: file.sensor_region.resolve()?,
    })
}

pub fn load_device(path: &Path) -> Result<HotplateSpec, ConfigError> {
    device_from_str(&read_file(path)?, path)
}

// ---------------------------------------------------------------------------
// Resolution

#[derive(Deserialize)]
struct ResolutionEntry {
    dx: String,
    dy: String,
    dz: String,
}

pub fn resolution_from_json(value: &serde_json::Value, origin: &Path) -> Result<Resolution, ConfigError> {
    let entry: ResolutionEntry =
        serde_json::from_value(value.clone()).map_err(|e| ConfigError::Json {
            path: origin.display().to_string(),
            source: e,
        })?;
    Ok(Resolution {
        dx: parse_length(&entry.dx)?,
        dy: parse_length(&entry.dy)?,
        dz: parse_length(&entry.dz)?,
    })
}

// ---------------------------------------------------------------------------
// Scenario

#[derive(Deserialize)]
struct ScenarioFile {
    #[serde(default = "default_ambient")]
    ambient_temperature_k: f64,
    #[serde(default)]
    ambient_mode: AmbientModeEntry,
    #[serde(default)]
    ambient_material: Option<String>,
    boundaries: Vec<BoundaryEntry>,
    #[serde(default)]
    sources: Vec<SourceEntry>,
    #[serde(default)]
    probes: Vec<ProbeEntry>,
}

fn default_ambient() -> f64 {
    300.0
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
enum AmbientModeEntry {
    #[default]
    Vacuum,
    StillAir,
}

#[derive(Deserialize)]
struct BoundaryEntry {
    #[serde(default)]
    face: Option<String>,
    #[serde(default)]
    material: Option<String>,
    #[serde(default)]
    temperature_k: Option<f64>,
}

#[derive(Deserialize)]
struct SourceEntry {
    region: RegionEntry,
    power: String,
}

#[derive(Deserialize)]
struct ProbeEntry {
    name: String,
    region: RegionEntry,
    statistic: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RegionEntry {
    Named(String),
    Box { min: [String; 3], max: [String; 3] },
}

impl RegionEntry {
    fn resolve(&self) -> Result<RegionRef, ConfigError> {
        match self {
            RegionEntry::Named(name) => Ok(RegionRef::Named(name.clone())),
            RegionEntry::Box { min, max } => {
                let parse3 = |v: &[String; 3]| -> Result<[f64; 3], ConfigError> {
                    Ok([parse_length(&v[0])?, parse_length(&v[1])?, parse_length(&v[2])?])
                };
                Ok(RegionRef::Box(Region::new(parse3(min)?, parse3(max)?)))
            }
        }
    }
}

fn parse_face(s: &str) -> Result<GridFace, ConfigError> {
    match s {
        "x_min" => Ok(GridFace::XMin),
        "x_max" => Ok(GridFace::XMax),
        "y_min" => Ok(GridFace::YMin),
        "y_max" => Ok(GridFace::YMax),
        "z_min" => Ok(GridFace::ZMin),
        "z_max" => Ok(GridFace::ZMax),
        other => Err(ConfigError::InvalidScenario(format!(
            "unknown grid face {other:?} (expected x_min, x_max, y_min, y_max, z_min or z_max)"
        ))),
    }
}

pub fn scenario_from_str(text: &str, origin: &Path) -> Result<ScenarioSpec, ConfigError> {
    let file: ScenarioFile = from_json(text, origin)?;
    let ambient = file.ambient_temperature_k;

    let mut boundaries = Vec::with_capacity(file.boundaries.len());
    for b in &file.boundaries {
        let temperature = b.temperature_k.unwrap_or(ambient);
        match (&b.face, &b.material) {
            (Some(face), None) => boundaries.push(BoundaryCondition::Face {
                face: parse_face(face)?,
                temperature,
            }),
            (None, Some(material)) => boundaries.push(BoundaryCondition::MaterialTag {
                material: material.clone(),
                temperature,
            }),
            _ => {
                return Err(ConfigError::InvalidScenario(
                    "each boundary needs exactly one of \"face\" or \"material\"".into(),
                ))
            }
        }
    }

    let mut sources = Vec::with_capacity(file.sources.len());
    for s in &file.sources {
        sources.push(HeatSource {
            region: s.region.resolve()?,
            power: parse_power(&s.power)?,
        });
    }

    let mut probes = Vec::with_capacity(file.probes.len());
    for p in &file.probes {
        let statistic = match p.statistic.as_str() {
            "max" => ProbeStatistic::Max,
            "average" | "volume-average" => ProbeStatistic::VolumeAverage,
            other => {
                return Err(ConfigError::InvalidScenario(format!(
                    "unknown probe statistic {other:?} (expected max or average)"
                )))
            }
        };
        probes.push(Probe {
            name: p.name.clone(),
            region: p.region.resolve()?,
            statistic,
        });
    }

    Ok(ScenarioSpec {
        sources,
        boundaries,
        ambient_temperature: ambient,
        ambient_mode: match file.ambient_mode {
            AmbientModeEntry::Vacuum => AmbientMode::Vacuum,
            AmbientModeEntry::StillAir => AmbientMode::StillAir,
        },
        ambient_material: file.ambient_material,
        probes,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ConfigError> {
    scenario_from_str(&read_file(path)?, path)
}
