//! Materials: thermal conductivity models and volumetric heat capacity.
//!
//! A material carries a conductivity model k(T) — either a constant or a
//! piecewise-linear table over (temperature, conductivity) breakpoints — and
//! a volumetric heat capacity ρ·c_p in J/(m³·K). Density never appears on its
//! own; it is folded into the volumetric heat capacity.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::ConfigError;

/// Grid axis, used where conductivity is direction-dependent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Piecewise-linear k(T) over strictly increasing temperature breakpoints.
///
/// Evaluation outside the table clamps to the nearest endpoint; each clamp
/// increments a warning counter instead of raising an error.
#[derive(Debug, Serialize)]
pub struct ConductivityTable {
    points: Vec<(f64, f64)>,
    #[serde(skip)]
    clamp_events: AtomicU64,
}

impl ConductivityTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.len() < 2 {
            return Err("conductivity table needs at least 2 breakpoints".into());
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(format!(
                    "table temperatures must be strictly increasing ({} K then {} K)",
                    w[0].0, w[1].0
                ));
            }
        }
        for (t, k) in &points {
            if !(*t > 0.0) || !(*k > 0.0) || !t.is_finite() || !k.is_finite() {
                return Err(format!("table entry ({t} K, {k} W/(m*K)) must be positive and finite"));
            }
        }
        Ok(Self {
            points,
            clamp_events: AtomicU64::new(0),
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Number of evaluations that fell outside the table and were clamped.
    pub fn clamp_count(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }

    fn eval(&self, t: f64) -> f64 {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        if t <= first.0 {
            if t < first.0 {
                self.clamp_events.fetch_add(1, Ordering::Relaxed);
            }
            return first.1;
        }
        if t >= last.0 {
            if t > last.0 {
                self.clamp_events.fetch_add(1, Ordering::Relaxed);
            }
            return last.1;
        }
        // Binary search for the segment containing t.
        let idx = self.points.partition_point(|(tp, _)| *tp <= t);
        let (t0, k0) = self.points[idx - 1];
        let (t1, k1) = self.points[idx];
        k0 + (k1 - k0) * (t - t0) / (t1 - t0)
    }

    fn bounds(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, k)| {
                (lo.min(*k), hi.max(*k))
            })
    }
}

impl Clone for ConductivityTable {
    fn clone(&self) -> Self {
        Self {
            points: self.points.clone(),
            clamp_events: AtomicU64::new(self.clamp_events.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for ConductivityTable {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

/// One layer of a collapsed film stack: a conductivity model plus the
/// physical thickness it represents inside the host voxel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackLayer {
    pub conductivity: ConductivityModel,
    pub volumetric_heat_capacity: f64,
    pub thickness: f64,
}

/// Thermal conductivity as a function of temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConductivityModel {
    /// Temperature-independent conductivity in W/(m·K).
    Constant(f64),
    /// Piecewise-linear table, clamped beyond its ends.
    Table(ConductivityTable),
    /// Effective model of sub-resolution films folded into one voxel layer of
    /// thickness `host_thickness`: layers conduct in parallel in-plane and in
    /// series through-plane. Derived during grid construction, never parsed
    /// from config files.
    FilmStack {
        layers: Vec<StackLayer>,
        host_thickness: f64,
    },
}

impl ConductivityModel {
    /// Evaluates k(T). For a film stack this is the in-plane effective value.
    pub fn at(&self, t: f64) -> f64 {
        self.along(Axis::X, t)
    }

    /// Evaluates k(T) along a grid axis.
    pub fn along(&self, axis: Axis, t: f64) -> f64 {
        match self {
            ConductivityModel::Constant(k) => *k,
            ConductivityModel::Table(table) => table.eval(t),
            ConductivityModel::FilmStack {
                layers,
                host_thickness,
            } => match axis {
                // Sheet conductances add in-plane.
                Axis::X | Axis::Y => {
                    layers
                        .iter()
                        .map(|l| l.conductivity.at(t) * l.thickness)
                        .sum::<f64>()
                        / host_thickness
                }
                // Areal resistances add through-plane; the combined stack is
                // carried by a voxel of the host thickness.
                Axis::Z => {
                    host_thickness
                        / layers
                            .iter()
                            .map(|l| l.thickness / l.conductivity.at(t))
                            .sum::<f64>()
                }
            },
        }
    }

    /// True when evaluation does not depend on temperature.
    pub fn is_constant(&self) -> bool {
        match self {
            ConductivityModel::Constant(_) => true,
            ConductivityModel::Table(_) => false,
            ConductivityModel::FilmStack { layers, .. } => {
                layers.iter().all(|l| l.conductivity.is_constant())
            }
        }
    }

    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::InvalidMaterial {
            name: name.to_string(),
            reason,
        };
        match self {
            ConductivityModel::Constant(k) => {
                if !(*k > 0.0) || !k.is_finite() {
                    return Err(bad(format!("conductivity must be positive and finite (got {k})")));
                }
            }
            ConductivityModel::Table(table) => {
                let (lo, _) = table.bounds();
                if !(lo > 0.0) {
                    return Err(bad("table conductivities must be positive".into()));
                }
            }
            ConductivityModel::FilmStack { layers, host_thickness } => {
                if layers.is_empty() || !(*host_thickness > 0.0) {
                    return Err(bad("film stack must have layers and positive host thickness".into()));
                }
                for l in layers {
                    l.conductivity.validate(name)?;
                    if !(l.thickness > 0.0) {
                        return Err(bad("film layer thickness must be positive".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A named material with conductivity model and volumetric heat capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Material {
    pub name: String,
    pub conductivity: ConductivityModel,
    /// ρ·c_p in J/(m³·K).
    pub volumetric_heat_capacity: f64,
}

impl Material {
    pub fn constant(name: &str, k: f64, volumetric_heat_capacity: f64) -> Self {
        Self {
            name: name.to_string(),
            conductivity: ConductivityModel::Constant(k),
            volumetric_heat_capacity,
        }
    }

    /// Evaluates this material's conductivity at temperature `t`.
    pub fn conductivity_at(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        self.conductivity.at(t)
    }

    /// Directional conductivity; differs from `conductivity_at` only for
    /// film-stack materials.
    pub fn conductivity_along(&self, axis: Axis, t: f64) -> f64 {
        self.conductivity.along(axis, t)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.conductivity.validate(&self.name)?;
        if !(self.volumetric_heat_capacity > 0.0) || !self.volumetric_heat_capacity.is_finite() {
            return Err(ConfigError::InvalidMaterial {
                name: self.name.clone(),
                reason: format!(
                    "volumetric heat capacity must be positive and finite (got {})",
                    self.volumetric_heat_capacity
                ),
            });
        }
        Ok(())
    }
}

/// Index of a material inside a [`MaterialTable`].
pub type MaterialId = u16;

/// An ordered, validated collection of materials.
///
/// Grid construction may append derived film-stack entries; entries are never
/// removed, so ids stay stable.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MaterialTable {
    materials: Vec<Material>,
}

impl MaterialTable {
    pub fn new(materials: Vec<Material>) -> Result<Self, ConfigError> {
        let mut table = Self::default();
        for m in materials {
            table.push(m)?;
        }
        Ok(table)
    }

    pub fn push(&mut self, material: Material) -> Result<MaterialId, ConfigError> {
        material.validate()?;
        if self.materials.iter().any(|m| m.name == material.name) {
            return Err(ConfigError::InvalidMaterial {
                name: material.name.clone(),
                reason: "duplicate material name".into(),
            });
        }
        self.materials.push(material);
        Ok((self.materials.len() - 1) as MaterialId)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn get(&self, id: MaterialId) -> &Material {
        &self.materials[id as usize]
    }

    pub fn id_of(&self, name: &str) -> Result<MaterialId, ConfigError> {
        self.materials
            .iter()
            .position(|m| m.name == name)
            .map(|i| i as MaterialId)
            .ok_or_else(|| ConfigError::UnknownMaterial(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(points: &[(f64, f64)]) -> ConductivityModel {
        ConductivityModel::Table(ConductivityTable::new(points.to_vec()).unwrap())
    }

    #[test]
    fn constant_model_ignores_temperature() {
        let m = Material::constant("gaas", 46.0, 1.74e6);
        assert_eq!(m.conductivity_at(500.0), 46.0);
    }

    #[test]
    fn table_interpolates_midpoint() {
        let m = Material {
            name: "gaas".into(),
            conductivity: table(&[(300.0, 46.0), (600.0, 23.0)]),
            volumetric_heat_capacity: 1.74e6,
        };
        assert_eq!(m.conductivity_at(450.0), 34.5);
    }

    #[test]
    fn table_clamps_and_counts() {
        let t = ConductivityTable::new(vec![(300.0, 46.0), (600.0, 23.0)]).unwrap();
        let model = ConductivityModel::Table(t);
        assert_eq!(model.at(700.0), 23.0);
        assert_eq!(model.at(100.0), 46.0);
        assert_eq!(model.at(300.0), 46.0); // endpoint hit is not a clamp
        if let ConductivityModel::Table(t) = &model {
            assert_eq!(t.clamp_count(), 2);
        }
    }

    #[test]
    fn table_rejects_non_increasing_temperatures() {
        assert!(ConductivityTable::new(vec![(300.0, 46.0), (300.0, 23.0)]).is_err());
        assert!(ConductivityTable::new(vec![(600.0, 46.0), (300.0, 23.0)]).is_err());
    }

    #[test]
    fn validation_rejects_non_positive_values() {
        let mut t = MaterialTable::default();
        assert!(t.push(Material::constant("bad", 0.0, 1.0)).is_err());
        assert!(t.push(Material::constant("bad", -3.0, 1.0)).is_err());
        assert!(t.push(Material::constant("bad", 3.0, 0.0)).is_err());
        assert!(t.push(Material::constant("ok", 3.0, 1.0)).is_ok());
        assert!(t.push(Material::constant("ok", 5.0, 1.0)).is_err()); // duplicate
    }

    #[test]
    fn film_stack_parallel_and_series() {
        let stack = ConductivityModel::FilmStack {
            layers: vec![
                StackLayer {
                    conductivity: ConductivityModel::Constant(40.0),
                    volumetric_heat_capacity: 1e6,
                    thickness: 1e-6,
                },
                StackLayer {
                    conductivity: ConductivityModel::Constant(10.0),
                    volumetric_heat_capacity: 2e6,
                    thickness: 0.5e-6,
                },
            ],
            host_thickness: 1e-6,
        };
        // In-plane: (40*1 + 10*0.5)/1 = 45 (thicknesses in um cancel).
        let k_ip = stack.along(Axis::X, 400.0);
        assert!((k_ip - 45.0).abs() < 1e-12);
        // Through-plane: 1 / (1/40 + 0.5/10) = 1/0.075.
        let k_tp = stack.along(Axis::Z, 400.0);
        assert!((k_tp - 1.0 / 0.075).abs() < 1e-12);
        assert!(stack.is_constant());
    }
}
