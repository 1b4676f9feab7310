//! Legacy ASCII VTK output of velocity and pressure.

use std::io::{self, Write};

use super::assembly::Discretization;
use super::quadrature::P2_EDGES;

/// VTK cell type for the six-node quadratic triangle.
const VTK_QUADRATIC_TRIANGLE: u32 = 22;

/// Writes an unstructured grid of quadratic triangles with point data
/// `velocity` (vectors) and `pressure` (P1 pressure evaluated at the P2
/// nodes).
pub fn write_vtk<W: Write>(disc: &Discretization, coeffs: &[f64], mut out: W) -> io::Result<()> {
    let d = disc.dofmap();
    let np2 = d.num_p2_nodes();
    let ne = d.num_elements();
    let off = d.pressure_dof(0);

    let mut pressure = vec![0.0; np2];
    let nv = d.num_pressure_dofs();
    pressure[..nv].copy_from_slice(&coeffs[off..off + nv]);
    for t in 0..ne {
        let p2 = d.element_p2(t);
        for (e, &(i, j)) in P2_EDGES.iter().enumerate() {
            pressure[p2[3 + e]] = 0.5 * (coeffs[off + p2[i]] + coeffs[off + p2[j]]);
        }
    }

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "velocity and pressure")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {np2} double")?;
    for &[x, y] in d.p2_coords() {
        writeln!(out, "{x} {y} 0")?;
    }
    writeln!(out, "CELLS {ne} {}", ne * 7)?;
    for t in 0..ne {
        let p = d.element_p2(t);
        writeln!(out, "6 {} {} {} {} {} {}", p[0], p[1], p[2], p[3], p[4], p[5])?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "{VTK_QUADRATIC_TRIANGLE}")?;
    }
    writeln!(out, "POINT_DATA {np2}")?;
    writeln!(out, "VECTORS velocity double")?;
    for i in 0..np2 {
        writeln!(out, "{} {} 0", coeffs[i], coeffs[np2 + i])?;
    }
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in &pressure {
        writeln!(out, "{p}")?;
    }
    Ok(())
}
