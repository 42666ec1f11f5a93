//! Legacy-VTK structured-points export of temperature fields.
//!
//! Voxel centers become the points of a STRUCTURED_POINTS dataset with the
//! temperature attached as ASCII point scalar data, readable by ParaView and
//! friends.

use std::io::Write;

use crate::model::grid::VoxelGrid;
use crate::solver::field::TemperatureField;

/// Writes a field as an ASCII legacy-VTK structured-points file.
pub fn write_structured_points<W: Write>(
    mut out: W,
    grid: &VoxelGrid,
    field: &TemperatureField,
    title: &str,
) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} {}", grid.nx, grid.ny, grid.nz)?;
    writeln!(out, "ORIGIN {} {} {}", 0.5 * grid.dx, 0.5 * grid.dy, 0.5 * grid.dz)?;
    writeln!(out, "SPACING {} {} {}", grid.dx, grid.dy, grid.dz)?;
    writeln!(out, "POINT_DATA {}", grid.voxel_count())?;
    writeln!(out, "SCALARS temperature double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    // Legacy structured points iterate x fastest, matching the grid's
    // linear index order.
    for v in &field.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload_shape() {
        let grid = VoxelGrid::uniform_block(2, 2, 1, [1e-6, 1e-6, 2e-6], 0);
        let mut field = TemperatureField::uniform(4, 300.0);
        field.values[3] = 310.0;
        let mut buf = Vec::new();
        write_structured_points(&mut buf, &grid, &field, "case").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[3], "DATASET STRUCTURED_POINTS");
        assert_eq!(lines[4], "DIMENSIONS 2 2 1");
        assert_eq!(lines[7], "POINT_DATA 4");
        assert_eq!(lines[8], "SCALARS temperature double 1");
        assert_eq!(lines.len(), 10 + 4);
        assert_eq!(lines[13], "310");
    }

    #[test]
    fn output_is_reproducible() {
        let grid = VoxelGrid::uniform_block(3, 1, 1, [1e-6; 3], 0);
        let field = TemperatureField::uniform(3, 312.34567);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_structured_points(&mut a, &grid, &field, "case").unwrap();
        write_structured_points(&mut b, &grid, &field, "case").unwrap();
        assert_eq!(a, b);
    }
}
