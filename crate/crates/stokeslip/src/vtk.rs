//! Legacy ASCII VTK export (unstructured grid, point data).
//!
//! Velocity is written as vectors (z padded with zero in 2D), pressure as
//! scalars, both at mesh vertices. Degree-2 fields are sampled at the
//! vertices, which is what most viewers expect of legacy files.

use crate::femspace::{DiscreteField, Spaces};
use crate::mesh::SimplicialMesh;
use crate::Real;
use std::fmt::Write as _;

pub fn write_vtk<T: Real>(
    mesh: &SimplicialMesh<T>,
    spaces: &Spaces<T>,
    velocity: &DiscreteField<T>,
    pressure: &DiscreteField<T>,
    title: &str,
) -> String {
    let dim = mesh.dim();
    let n_vertices = mesh.n_vertices();
    let n_cells = mesh.n_cells();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let mut line = title.replace(['\n', '\r'], " ");
    line.truncate(255);
    out.push_str(&line);
    out.push('\n');
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    writeln!(out, "POINTS {n_vertices} double").unwrap();
    for v in 0..n_vertices {
        let x = mesh.vertex(v);
        let z = if dim == 3 { x[2].as_f64() } else { 0.0 };
        writeln!(out, "{:.9e} {:.9e} {:.9e}", x[0].as_f64(), x[1].as_f64(), z).unwrap();
    }

    writeln!(out, "CELLS {n_cells} {}", n_cells * (dim + 2)).unwrap();
    for c in 0..n_cells {
        let cell = mesh.cell(c);
        write!(out, "{}", dim + 1).unwrap();
        for &v in cell {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "CELL_TYPES {n_cells}").unwrap();
    let cell_type = if dim == 2 { 5 } else { 10 }; // VTK_TRIANGLE / VTK_TETRA
    for _ in 0..n_cells {
        writeln!(out, "{cell_type}").unwrap();
    }

    writeln!(out, "POINT_DATA {n_vertices}").unwrap();
    writeln!(out, "VECTORS velocity double").unwrap();
    let nc = spaces.velocity.n_components();
    for v in 0..n_vertices {
        // vertices are the first Lagrange nodes for both degrees
        let ux = velocity.coeffs[v * nc].as_f64();
        let uy = velocity.coeffs[v * nc + 1].as_f64();
        let uz = if dim == 3 {
            velocity.coeffs[v * nc + 2].as_f64()
        } else {
            0.0
        };
        writeln!(out, "{ux:.9e} {uy:.9e} {uz:.9e}").unwrap();
    }
    writeln!(out, "SCALARS pressure double 1").unwrap();
    writeln!(out, "LOOKUP_TABLE default").unwrap();
    for v in 0..n_vertices {
        writeln!(out, "{:.9e}", pressure.coeffs[v].as_f64()).unwrap();
    }
    out
}
