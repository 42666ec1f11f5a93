//! Parametric suspended hot-plate geometry and its voxel realization.
//!
//! The device is a thick frame with a square opening, a thin island plate
//! suspended in the middle of the opening by four axis-aligned bridges, and
//! an optional stack of thin films on top of the island. Everything else in
//! the opening is etched away (void).
//!
//! All geometry arithmetic runs on integer nanometers: per axis the realized
//! voxel spacing is the largest value not exceeding the requested resolution
//! that divides every feature boundary coordinate, so each boundary lands
//! exactly on a voxel face and construction is bit-reproducible.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::BuildError;
use crate::model::grid::{Device, FeatureVolume, Region, VoxelGrid};
use crate::model::material::{
    ConductivityModel, Material, MaterialId, MaterialTable, StackLayer,
};
use crate::units::{nm_to_m, to_nm};

/// A rectangle on the plate, positioned by its center offset from the island
/// center. Used for the heater and sensor footprints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateRect {
    pub offset: [f64; 2],
    pub width: f64,
    pub length: f64,
}

/// One film of the layer stack above the plate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerSpec {
    pub material: String,
    pub thickness: f64,
}

/// Parametric description of the suspended hot-plate device (SI units).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HotplateSpec {
    pub island_width: f64,
    pub island_length: f64,
    pub plate_thickness: f64,
    pub bridge_count: u8,
    pub bridge_length: f64,
    pub bridge_width: f64,
    pub frame_width: f64,
    pub frame_thickness: f64,
    pub island_material: String,
    pub bridge_material: String,
    pub frame_material: String,
    pub layer_stack: Vec<LayerSpec>,
    pub heater_region: PlateRect,
    pub sensor_region: PlateRect,
}

/// Target voxel edge lengths per axis (upper bounds; realized spacings are
/// adjusted downward to snap feature boundaries).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Resolution {
    pub fn uniform(h: f64) -> Self {
        Self { dx: h, dy: h, dz: h }
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// One axis of the snapped lattice.
struct AxisGrid {
    /// Spacing numerator/denominator: spacing_nm = g / div.
    g: i64,
    div: i64,
    n: usize,
    spacing_m: f64,
}

impl AxisGrid {
    fn build(total_nm: i64, boundaries_nm: &[i64], target_m: f64) -> Self {
        // Sub-nanometer requests saturate at the 1 nm quantization floor.
        let target_nm = to_nm(target_m).max(1);
        let mut g = total_nm;
        for &b in boundaries_nm {
            if b > 0 && b < total_nm {
                g = gcd(g, b);
            }
        }
        let div = if g <= target_nm { 1 } else { (g + target_nm - 1) / target_nm };
        let n = (total_nm / g) as usize * div as usize;
        let spacing_m = nm_to_m(g) / div as f64;
        Self { g, div, n, spacing_m }
    }

    /// Voxel index of a snapped coordinate. Exact: every boundary passed to
    /// `build` is a multiple of g, and spacing is g/div.
    fn idx(&self, nm: i64) -> usize {
        debug_assert_eq!(nm % self.g, 0, "coordinate {nm} nm does not snap");
        (nm / self.g * self.div) as usize
    }
}

/// Integer-nm box used while painting.
#[derive(Clone, Copy)]
struct NmBox {
    x: (i64, i64),
    y: (i64, i64),
    z: (i64, i64),
}

impl NmBox {
    fn volume_m3(&self) -> f64 {
        nm_to_m(self.x.1 - self.x.0) * nm_to_m(self.y.1 - self.y.0) * nm_to_m(self.z.1 - self.z.0)
    }
}

struct Painter<'a> {
    grid: &'a mut VoxelGrid,
    ax: &'a AxisGrid,
    ay: &'a AxisGrid,
    az: &'a AxisGrid,
}

impl Painter<'_> {
    /// Paints a box with a material and returns the voxel volume painted.
    fn paint(&mut self, b: NmBox, material: MaterialId) -> f64 {
        let (x0, x1) = (self.ax.idx(b.x.0), self.ax.idx(b.x.1));
        let (y0, y1) = (self.ay.idx(b.y.0), self.ay.idx(b.y.1));
        let (z0, z1) = (self.az.idx(b.z.0), self.az.idx(b.z.1));
        let mut count = 0usize;
        for z in z0..z1 {
            for y in y0..y1 {
                for x in x0..x1 {
                    let i = self.grid.index(x, y, z);
                    self.grid.set_material(i, material);
                    count += 1;
                }
            }
        }
        count as f64 * self.grid.voxel_volume()
    }

    /// Reassigns the voxel layer directly below z-coordinate `z_top_nm`
    /// within a footprint, used to install derived film-stack materials.
    fn repaint_top_layer(&mut self, x: (i64, i64), y: (i64, i64), z_top_nm: i64, material: MaterialId) {
        let z = self.az.idx(z_top_nm) - 1;
        let (x0, x1) = (self.ax.idx(x.0), self.ax.idx(x.1));
        let (y0, y1) = (self.ay.idx(y.0), self.ay.idx(y.1));
        for yy in y0..y1 {
            for xx in x0..x1 {
                let i = self.grid.index(xx, yy, z);
                self.grid.set_material(i, material);
            }
        }
    }
}

struct FeatureCheck<'a> {
    feature: &'a str,
    axis: &'static str,
    size: f64,
    target: f64,
}

impl HotplateSpec {
    fn validate(&self) -> Result<(), BuildError> {
        let err = |msg: String| Err(BuildError::Inconsistent(msg));
        let positive = [
            ("island_width", self.island_width),
            ("island_length", self.island_length),
            ("plate_thickness", self.plate_thickness),
            ("frame_width", self.frame_width),
            ("frame_thickness", self.frame_thickness),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return err(format!("{name} must be positive (got {v})"));
            }
        }
        if self.bridge_count != 4 {
            return err(format!("bridge_count must be 4 (got {})", self.bridge_count));
        }
        if self.bridge_length < 0.0 || !self.bridge_length.is_finite() {
            return err(format!("bridge_length must be non-negative (got {})", self.bridge_length));
        }
        if self.bridge_length > 0.0 && !(self.bridge_width > 0.0) {
            return err("bridge_width must be positive when bridges have length".into());
        }
        if self.bridge_width > self.island_width || self.bridge_width > self.island_length {
            return err("bridge_width exceeds the island footprint".into());
        }
        if self.plate_thickness > self.frame_thickness {
            return err(format!(
                "plate_thickness ({}) exceeds frame_thickness ({})",
                self.plate_thickness, self.frame_thickness
            ));
        }
        for (name, r) in [("heater_region", &self.heater_region), ("sensor_region", &self.sensor_region)] {
            if !(r.width > 0.0) || !(r.length > 0.0) {
                return err(format!("{name} must have positive width and length"));
            }
            let half_w = self.island_width / 2.0;
            let half_l = self.island_length / 2.0;
            if r.offset[0].abs() + r.width / 2.0 > half_w + 1e-12
                || r.offset[1].abs() + r.length / 2.0 > half_l + 1e-12
            {
                return err(format!("{name} does not lie within the island footprint"));
            }
        }
        for l in &self.layer_stack {
            if !(l.thickness > 0.0) || !l.thickness.is_finite() {
                return err(format!("layer {:?} must have positive thickness", l.material));
            }
        }
        Ok(())
    }
}

/// Realizes a hot-plate spec on a voxel grid.
///
/// Films of the layer stack thinner than the target z-resolution are not
/// given their own voxel layers; they are folded into the solid layer
/// directly beneath them as an effective film-stack material (parallel
/// conductance in-plane, series through-plane, summed heat capacity).
pub fn build_grid(
    spec: &HotplateSpec,
    materials: &MaterialTable,
    resolution: Resolution,
) -> Result<Device, BuildError> {
    spec.validate()?;
    if !(resolution.dx > 0.0 && resolution.dy > 0.0 && resolution.dz > 0.0) {
        return Err(BuildError::Inconsistent("resolution must be positive per axis".into()));
    }

    let mut table = materials.clone();
    let island_mat = table.id_of(&spec.island_material)?;
    let bridge_mat = table.id_of(&spec.bridge_material)?;
    let frame_mat = table.id_of(&spec.frame_material)?;
    for l in &spec.layer_stack {
        table.id_of(&l.material)?;
    }

    // Reject named solid features thinner than the requested resolution.
    let checks = [
        FeatureCheck { feature: "island_width", axis: "x", size: spec.island_width, target: resolution.dx },
        FeatureCheck { feature: "island_length", axis: "y", size: spec.island_length, target: resolution.dy },
        FeatureCheck { feature: "plate_thickness", axis: "z", size: spec.plate_thickness, target: resolution.dz },
        FeatureCheck { feature: "frame_width", axis: "x", size: spec.frame_width, target: resolution.dx },
        FeatureCheck { feature: "frame_width", axis: "y", size: spec.frame_width, target: resolution.dy },
        FeatureCheck { feature: "frame_thickness", axis: "z", size: spec.frame_thickness, target: resolution.dz },
    ];
    for c in checks {
        if c.size < c.target {
            return Err(BuildError::FeatureThinnerThanResolution {
                feature: c.feature.to_string(),
                axis: c.axis,
                size_m: c.size,
                resolution_m: c.target,
            });
        }
    }
    if spec.bridge_length > 0.0 {
        // Cross bridges run along both axes, so length and width are checked
        // against both in-plane targets.
        for (axis, target) in [("x", resolution.dx), ("y", resolution.dy)] {
            for (feature, size) in [("bridge_length", spec.bridge_length), ("bridge_width", spec.bridge_width)] {
                if size < target {
                    return Err(BuildError::FeatureThinnerThanResolution {
                        feature: feature.to_string(),
                        axis,
                        size_m: size,
                        resolution_m: target,
                    });
                }
            }
        }
    }

    // Integer-nm layout. Origin at the outer frame corner.
    let iw = to_nm(spec.island_width);
    let il = to_nm(spec.island_length);
    let bl = to_nm(spec.bridge_length);
    let bw = to_nm(spec.bridge_width);
    let fw = to_nm(spec.frame_width);
    let fth = to_nm(spec.frame_thickness);
    let pth = to_nm(spec.plate_thickness);
    if [iw, il, fw, fth, pth].iter().any(|v| *v <= 0) {
        return Err(BuildError::Inconsistent(
            "a feature dimension rounds to zero at nanometer granularity".into(),
        ));
    }

    let total_x = iw + 2 * (bl + fw);
    let total_y = il + 2 * (bl + fw);
    let open_x = (fw, total_x - fw);
    let open_y = (fw, total_y - fw);
    let island_x = (fw + bl, fw + bl + iw);
    let island_y = (fw + bl, fw + bl + il);
    let cx = total_x / 2;
    let cy = total_y / 2;
    // Bridges are symmetric about the island center; a half-nanometer edge
    // cannot snap, so widths must be an even number of nanometers.
    if bl > 0 && (bw % 2 != 0 || (total_x - bw) % 2 != 0 || (total_y - bw) % 2 != 0) {
        return Err(BuildError::Inconsistent(
            "bridge edges must land on whole nanometers (check bridge_width parity against the device footprint)".into(),
        ));
    }
    let plate_z = (fth - pth, fth);

    // Films: explicit voxel layers when at least as thick as the target
    // z-resolution, otherwise folded into the layer beneath.
    let dz_target_nm = to_nm(resolution.dz);
    let mut explicit_films: Vec<(usize, i64, i64)> = Vec::new(); // (stack idx, z0, z1)
    let mut folded: Vec<Vec<usize>> = vec![Vec::new()]; // folded[i] -> films on top of host i
    let mut z_top = fth;
    for (i, layer) in spec.layer_stack.iter().enumerate() {
        let t = to_nm(layer.thickness);
        if t <= 0 {
            return Err(BuildError::Inconsistent(format!(
                "layer {:?} thickness rounds to zero nanometers",
                layer.material
            )));
        }
        if t >= dz_target_nm {
            explicit_films.push((i, z_top, z_top + t));
            z_top += t;
            folded.push(Vec::new());
        } else {
            folded.last_mut().unwrap().push(i);
        }
    }
    let total_z = z_top;

    // Boundary sets per axis.
    let heater = rect_nm(&spec.heater_region, cx, cy)?;
    let sensor = rect_nm(&spec.sensor_region, cx, cy)?;
    let mut xb = vec![
        open_x.0, open_x.1, island_x.0, island_x.1,
        cx - bw / 2, cx + bw / 2,
        heater.0 .0, heater.0 .1, sensor.0 .0, sensor.0 .1,
    ];
    let mut yb = vec![
        open_y.0, open_y.1, island_y.0, island_y.1,
        cy - bw / 2, cy + bw / 2,
        heater.1 .0, heater.1 .1, sensor.1 .0, sensor.1 .1,
    ];
    let mut zb = vec![plate_z.0, plate_z.1, fth];
    for (_, z0, z1) in &explicit_films {
        zb.push(*z0);
        zb.push(*z1);
    }
    xb.push(total_x);
    yb.push(total_y);
    zb.push(total_z);

    let ax = AxisGrid::build(total_x, &xb, resolution.dx);
    let ay = AxisGrid::build(total_y, &yb, resolution.dy);
    let az = AxisGrid::build(total_z, &zb, resolution.dz);

    let mut grid = VoxelGrid::empty(ax.n, ay.n, az.n, [ax.spacing_m, ay.spacing_m, az.spacing_m]);

    // Derived film-stack materials: one per host layer carrying folded films.
    // Host layers: 0 = island top voxel layer, i>0 = top voxel layer of the
    // i-th explicit film.
    let dz = grid.dz;
    let mut host_blend: Vec<Option<MaterialId>> = vec![None; folded.len()];
    for (host, films) in folded.iter().enumerate() {
        if films.is_empty() {
            continue;
        }
        let host_mat_id = if host == 0 {
            island_mat
        } else {
            table.id_of(&spec.layer_stack[explicit_films[host - 1].0].material)?
        };
        let host_mat = table.get(host_mat_id).clone();
        let mut layers = vec![StackLayer {
            conductivity: host_mat.conductivity.clone(),
            volumetric_heat_capacity: host_mat.volumetric_heat_capacity,
            thickness: dz,
        }];
        let mut name = host_mat.name.clone();
        for &fi in films {
            let fm = table.get(table.id_of(&spec.layer_stack[fi].material)?).clone();
            layers.push(StackLayer {
                conductivity: fm.conductivity.clone(),
                volumetric_heat_capacity: fm.volumetric_heat_capacity,
                thickness: spec.layer_stack[fi].thickness,
            });
            name = format!("{name}+{}", fm.name);
        }
        // Heat capacity per voxel volume keeps the stack's total thermal mass.
        let vhc = layers
            .iter()
            .map(|l| l.volumetric_heat_capacity * l.thickness)
            .sum::<f64>()
            / dz;
        let blend = Material {
            name: format!("{name} (film stack)"),
            conductivity: ConductivityModel::FilmStack {
                layers,
                host_thickness: dz,
            },
            volumetric_heat_capacity: vhc,
        };
        host_blend[host] = Some(table.push(blend)?);
    }

    let mut painter = Painter { grid: &mut grid, ax: &ax, ay: &ay, az: &az };
    let mut features: BTreeMap<String, FeatureVolume> = BTreeMap::new();
    let record = |features: &mut BTreeMap<String, FeatureVolume>, name: &str, analytic: f64, voxel: f64| {
        let e = features.entry(name.to_string()).or_insert(FeatureVolume {
            analytic_m3: 0.0,
            voxel_m3: 0.0,
        });
        e.analytic_m3 += analytic;
        e.voxel_m3 += voxel;
    };

    // Frame: full-depth band around the opening, painted as four slabs.
    let frame_slabs = [
        NmBox { x: (0, total_x), y: (0, open_y.0), z: (0, fth) },
        NmBox { x: (0, total_x), y: (open_y.1, total_y), z: (0, fth) },
        NmBox { x: (0, open_x.0), y: (open_y.0, open_y.1), z: (0, fth) },
        NmBox { x: (open_x.1, total_x), y: (open_y.0, open_y.1), z: (0, fth) },
    ];
    for s in frame_slabs {
        let v = painter.paint(s, frame_mat);
        record(&mut features, "frame", s.volume_m3(), v);
    }

    // Bridges: plate-thick straps from the island edge midpoints to the frame.
    if bl > 0 {
        let bridges = [
            NmBox { x: (open_x.0, island_x.0), y: (cy - bw / 2, cy + bw / 2), z: plate_z },
            NmBox { x: (island_x.1, open_x.1), y: (cy - bw / 2, cy + bw / 2), z: plate_z },
            NmBox { x: (cx - bw / 2, cx + bw / 2), y: (open_y.0, island_y.0), z: plate_z },
            NmBox { x: (cx - bw / 2, cx + bw / 2), y: (island_y.1, open_y.1), z: plate_z },
        ];
        for b in bridges {
            let v = painter.paint(b, bridge_mat);
            record(&mut features, "bridges", b.volume_m3(), v);
        }
    } else {
        record(&mut features, "bridges", 0.0, 0.0);
    }

    // Island plate. The top voxel layer hosts folded films when present.
    let island_box = NmBox { x: island_x, y: island_y, z: plate_z };
    let v = painter.paint(island_box, island_mat);
    record(&mut features, "island", island_box.volume_m3(), v);
    if let Some(blend_id) = host_blend[0] {
        painter.repaint_top_layer(island_x, island_y, fth, blend_id);
    }

    // Explicit films above the island footprint.
    for (host, (stack_idx, z0, z1)) in explicit_films.iter().enumerate() {
        let mat = table.id_of(&spec.layer_stack[*stack_idx].material)?;
        let b = NmBox { x: island_x, y: island_y, z: (*z0, *z1) };
        let v = painter.paint(b, mat);
        record(&mut features, &format!("film:{}", spec.layer_stack[*stack_idx].material), b.volume_m3(), v);
        if let Some(blend_id) = host_blend[host + 1] {
            painter.repaint_top_layer(island_x, island_y, *z1, blend_id);
        }
    }

    // Folded films belong to the island volume audit analytically; account
    // for them as zero-voxel features so the audit stays explicit.
    for films in &folded {
        for &fi in films {
            let l = &spec.layer_stack[fi];
            record(
                &mut features,
                &format!("film:{} (folded)", l.material),
                l.thickness * spec.island_width * spec.island_length,
                0.0,
            );
        }
    }

    let mut regions = BTreeMap::new();
    let plate_lo = nm_to_m(plate_z.0);
    let plate_hi = nm_to_m(plate_z.1);
    regions.insert(
        "island".to_string(),
        Region::new(
            [nm_to_m(island_x.0), nm_to_m(island_y.0), plate_lo],
            [nm_to_m(island_x.1), nm_to_m(island_y.1), plate_hi],
        ),
    );
    regions.insert(
        "heater".to_string(),
        Region::new(
            [nm_to_m(heater.0 .0), nm_to_m(heater.1 .0), plate_lo],
            [nm_to_m(heater.0 .1), nm_to_m(heater.1 .1), plate_hi],
        ),
    );
    regions.insert(
        "sensor".to_string(),
        Region::new(
            [nm_to_m(sensor.0 .0), nm_to_m(sensor.1 .0), plate_lo],
            [nm_to_m(sensor.0 .1), nm_to_m(sensor.1 .1), plate_hi],
        ),
    );
    regions.insert(
        "frame_edge".to_string(),
        Region::new(
            [0.0, 0.0, 0.0],
            [nm_to_m(open_x.0), nm_to_m(total_y), nm_to_m(fth)],
        ),
    );
    regions.insert(
        "domain".to_string(),
        Region::new([0.0, 0.0, 0.0], [nm_to_m(total_x), nm_to_m(total_y), nm_to_m(total_z)]),
    );

    Ok(Device {
        grid,
        materials: table,
        regions,
        features,
    })
}

type NmRect = ((i64, i64), (i64, i64));

fn rect_nm(r: &PlateRect, cx: i64, cy: i64) -> Result<NmRect, BuildError> {
    let w = to_nm(r.width);
    let l = to_nm(r.length);
    let ox = to_nm(r.offset[0]);
    let oy = to_nm(r.offset[1]);
    if w <= 0 || l <= 0 {
        return Err(BuildError::Inconsistent(
            "plate rectangle rounds to zero size at nanometer granularity".into(),
        ));
    }
    if w % 2 != 0 || l % 2 != 0 {
        return Err(BuildError::Inconsistent(
            "plate rectangle width/length must be an even number of nanometers".into(),
        ));
    }
    Ok(((cx + ox - w / 2, cx + ox + w / 2), (cy + oy - l / 2, cy + oy + l / 2)))
}
