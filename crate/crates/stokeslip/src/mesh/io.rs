//! Line-oriented text format for simplicial meshes.
//!
//! ```text
//! # optional comments anywhere
//! mesh <dim> <n_vertices> <n_cells> <n_boundary_facets>
//! <x> <y> [<z>]                 (n_vertices lines)
//! <v0> <v1> <v2> [<v3>]         (n_cells lines, zero-based)
//! <tag> <v0> ... <v_{dim-1}>    (n_boundary_facets lines)
//! ```
//!
//! Tags are `dirichlet`, `slip` or `donothing`. Coordinates are written
//! with 17 significant digits so that `read(write(mesh))` reproduces the
//! mesh exactly.

use super::{BoundaryTag, MeshError, SimplicialMesh};
use crate::Real;
use std::fmt::Write as _;

pub fn write_mesh<T: Real>(mesh: &SimplicialMesh<T>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "mesh {} {} {} {}",
        mesh.dim(),
        mesh.n_vertices(),
        mesh.n_cells(),
        mesh.n_boundary_facets()
    )
    .unwrap();
    for v in 0..mesh.n_vertices() {
        let x = mesh.vertex(v);
        for d in 0..mesh.dim() {
            if d > 0 {
                out.push(' ');
            }
            write!(out, "{:.16e}", x[d].as_f64()).unwrap();
        }
        out.push('\n');
    }
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        for (k, v) in cell.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    for facet in mesh.boundary_facets() {
        out.push_str(facet.tag.keyword());
        for v in &facet.vertices {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_mesh<T: Real>(text: &str) -> Result<SimplicialMesh<T>, MeshError> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    });

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| MeshError::BadHeader("empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("mesh") {
        return Err(MeshError::BadHeader(format!(
            "line {line_no}: expected `mesh <dim> <n_vertices> <n_cells> <n_facets>`"
        )));
    }
    let mut read_count = |what: &str| -> Result<usize, MeshError> {
        parts
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| MeshError::BadHeader(format!("line {line_no}: bad {what}")))
    };
    let dim = read_count("dimension")?;
    let n_vertices = read_count("vertex count")?;
    let n_cells = read_count("cell count")?;
    let n_facets = read_count("facet count")?;
    if dim != 2 && dim != 3 {
        return Err(MeshError::BadDimension(dim));
    }

    let mut next_line = |what: &str| -> Result<(usize, &str), MeshError> {
        lines.next().ok_or_else(|| MeshError::BadHeader(format!("unexpected end of file in {what}")))
    };

    let mut vertices = Vec::with_capacity(n_vertices * dim);
    for _ in 0..n_vertices {
        let (line, text) = next_line("vertex block")?;
        let coords: Vec<&str> = text.split_whitespace().collect();
        if coords.len() != dim {
            return Err(MeshError::BadLine {
                line,
                reason: format!("expected {dim} coordinates"),
            });
        }
        for word in coords {
            let value: f64 = word.parse().map_err(|_| MeshError::BadLine {
                line,
                reason: format!("bad coordinate `{word}`"),
            })?;
            vertices.push(T::lit(value));
        }
    }

    let mut cells = Vec::with_capacity(n_cells * (dim + 1));
    for _ in 0..n_cells {
        let (line, text) = next_line("cell block")?;
        let ids: Vec<&str> = text.split_whitespace().collect();
        if ids.len() != dim + 1 {
            return Err(MeshError::BadLine {
                line,
                reason: format!("expected {} vertex indices", dim + 1),
            });
        }
        for word in ids {
            let v: usize = word.parse().map_err(|_| MeshError::BadLine {
                line,
                reason: format!("bad vertex index `{word}`"),
            })?;
            cells.push(v);
        }
    }

    let mut facets = Vec::with_capacity(n_facets);
    for _ in 0..n_facets {
        let (line, text) = next_line("facet block")?;
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != dim + 1 {
            return Err(MeshError::BadLine {
                line,
                reason: format!("expected `<tag>` and {dim} vertex indices"),
            });
        }
        let tag = BoundaryTag::parse(words[0]).ok_or_else(|| MeshError::UnknownTag(words[0].into()))?;
        let mut verts = Vec::with_capacity(dim);
        for word in &words[1..] {
            let v: usize = word.parse().map_err(|_| MeshError::BadLine {
                line,
                reason: format!("bad vertex index `{word}`"),
            })?;
            verts.push(v);
        }
        facets.push((tag, verts));
    }

    SimplicialMesh::new(dim, vertices, cells, facets)
}
