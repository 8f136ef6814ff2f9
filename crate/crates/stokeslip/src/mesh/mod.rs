//! Simplicial meshes: triangles in 2D, tetrahedra in 3D.
//!
//! A mesh stores vertex coordinates, cell connectivity and a list of tagged
//! boundary facets, together with precomputed geometric quantities (cell
//! diameters `h_K`, facet diameters `h_E`, volumes). Meshes are immutable
//! after construction and validated on construction:
//!
//! * every vertex index is in range,
//! * every cell has positive signed volume under its stored vertex order,
//! * every boundary facet is a face of exactly one cell, and the tagged
//!   facets cover the topological boundary exactly.
//!
//! Boundary frames: the outward unit normal is recovered per facet (flat
//! facets, constant normal). Tangents are fixed by convention: in 2D
//! `t1 = rot90ccw(n)` (so the facet on `y = -1` of a box has `n = (0,-1)`
//! and `t1 = (1,0)`); in 3D `t1 = normalize(n x e_a)` where `e_a` is the
//! coordinate axis minimizing `|n . e_a|` (ties broken by the smallest axis
//! index) and `t2 = n x t1`. Data for tangential tractions must be supplied
//! with respect to this convention.

mod generate;
mod io;

pub use generate::{generate_structured_cube, generate_structured_square};
pub use io::{read_mesh, write_mesh};

use crate::Real;
use thiserror::Error;

/// Boundary condition class attached to a boundary facet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Velocity prescribed weakly (Nitsche).
    Dirichlet,
    /// Normal velocity prescribed weakly, tangential traction given.
    Slip,
    /// Natural outflow, no boundary terms.
    DoNothing,
}

impl BoundaryTag {
    pub fn keyword(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Slip => "slip",
            BoundaryTag::DoNothing => "donothing",
        }
    }

    pub fn parse(word: &str) -> Option<Self> {
        match word {
            "dirichlet" => Some(BoundaryTag::Dirichlet),
            "slip" => Some(BoundaryTag::Slip),
            "donothing" => Some(BoundaryTag::DoNothing),
            _ => None,
        }
    }
}

/// A tagged boundary facet with its owning cell.
#[derive(Clone, Debug)]
pub struct BoundaryFacet {
    pub tag: BoundaryTag,
    /// `dim` vertex indices.
    pub vertices: Vec<usize>,
    /// Index of the unique cell having this facet as a face.
    pub cell: usize,
}

/// Orthonormal frame of a flat boundary facet: outward normal plus
/// `dim - 1` tangents spanning the facet plane.
#[derive(Clone, Copy, Debug)]
pub struct FacetFrame<T> {
    pub dim: usize,
    pub normal: [T; 3],
    pub tangents: [[T; 3]; 2],
}

impl<T: Real> FacetFrame<T> {
    pub fn normal(&self) -> &[T] {
        &self.normal[..self.dim]
    }

    pub fn tangent(&self, i: usize) -> &[T] {
        debug_assert!(i < self.dim - 1);
        &self.tangents[i][..self.dim]
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("malformed mesh header: {0}")]
    BadHeader(String),
    #[error("malformed mesh line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("{context}: vertex index {index} out of range (mesh has {n_vertices} vertices)")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        n_vertices: usize,
    },
    #[error("cell {cell} has non-positive signed volume")]
    NonPositiveVolume { cell: usize },
    #[error("boundary is open: cell face {face:?} lies on the boundary but is not tagged")]
    OpenBoundary { face: Vec<usize> },
    #[error("tagged facet {face:?} is not a boundary face of any cell")]
    NotABoundaryFace { face: Vec<usize> },
    #[error("face {face:?} is shared by more than two cells")]
    NonManifold { face: Vec<usize> },
    #[error("boundary facet {facet} is degenerate (zero measure)")]
    DegenerateFacet { facet: usize },
    #[error("unknown boundary tag `{0}`")]
    UnknownTag(String),
    #[error("unsupported mesh dimension {0} (expected 2 or 3)")]
    BadDimension(usize),
}

/// Immutable simplicial mesh with tagged boundary.
#[derive(Clone, Debug)]
pub struct SimplicialMesh<T> {
    dim: usize,
    /// Flat coordinates, `n_vertices * dim`.
    vertices: Vec<T>,
    /// Flat connectivity, `n_cells * (dim + 1)`.
    cells: Vec<usize>,
    boundary_facets: Vec<BoundaryFacet>,
    cell_diameters: Vec<T>,
    facet_diameters: Vec<T>,
    cell_volumes: Vec<T>,
    facet_measures: Vec<T>,
}

impl<T: Real> SimplicialMesh<T> {
    /// Builds and validates a mesh from raw arrays. `facets` lists the
    /// tagged boundary facets by their vertex indices (any vertex order).
    pub fn new(
        dim: usize,
        vertices: Vec<T>,
        cells: Vec<usize>,
        facets: Vec<(BoundaryTag, Vec<usize>)>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::BadDimension(dim));
        }
        assert_eq!(vertices.len() % dim, 0, "vertex array length");
        assert_eq!(cells.len() % (dim + 1), 0, "cell array length");
        let n_vertices = vertices.len() / dim;
        let n_cells = cells.len() / (dim + 1);

        for (context, index) in cells.iter().map(|&v| ("cell connectivity", v)).chain(
            facets
                .iter()
                .flat_map(|(_, f)| f.iter().map(|&v| ("boundary facet", v))),
        ) {
            if index >= n_vertices {
                return Err(MeshError::IndexOutOfRange {
                    context,
                    index,
                    n_vertices,
                });
            }
        }

        // Face -> owning cells, keyed by sorted vertex tuple.
        let mut face_cells: std::collections::HashMap<Vec<usize>, Vec<usize>> =
            std::collections::HashMap::new();
        for c in 0..n_cells {
            let cell = &cells[c * (dim + 1)..(c + 1) * (dim + 1)];
            for skip in 0..=dim {
                let mut face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                face.sort_unstable();
                face_cells.entry(face).or_default().push(c);
            }
        }
        for (face, owners) in &face_cells {
            if owners.len() > 2 {
                return Err(MeshError::NonManifold { face: face.clone() });
            }
        }

        let mut boundary_facets = Vec::with_capacity(facets.len());
        let mut tagged: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
        for (tag, f) in facets {
            let mut key = f.clone();
            key.sort_unstable();
            match face_cells.get(&key) {
                Some(owners) if owners.len() == 1 => {
                    boundary_facets.push(BoundaryFacet {
                        tag,
                        vertices: f,
                        cell: owners[0],
                    });
                    tagged.insert(key);
                }
                _ => return Err(MeshError::NotABoundaryFace { face: key }),
            }
        }
        // Closure: every once-owned face must be tagged.
        let mut once_faces: Vec<&Vec<usize>> = face_cells
            .iter()
            .filter(|(_, owners)| owners.len() == 1)
            .map(|(face, _)| face)
            .collect();
        once_faces.sort();
        for face in once_faces {
            if !tagged.contains(face) {
                return Err(MeshError::OpenBoundary { face: face.clone() });
            }
        }

        let mut mesh = SimplicialMesh {
            dim,
            vertices,
            cells,
            boundary_facets,
            cell_diameters: Vec::new(),
            facet_diameters: Vec::new(),
            cell_volumes: Vec::new(),
            facet_measures: Vec::new(),
        };
        mesh.compute_geometry()?;
        Ok(mesh)
    }

    fn compute_geometry(&mut self) -> Result<(), MeshError> {
        let n_cells = self.n_cells();
        self.cell_diameters = Vec::with_capacity(n_cells);
        self.cell_volumes = Vec::with_capacity(n_cells);
        for c in 0..n_cells {
            let vol = self.signed_volume(c);
            if vol <= T::zero() {
                return Err(MeshError::NonPositiveVolume { cell: c });
            }
            self.cell_volumes.push(vol);
            self.cell_diameters.push(self.longest_edge(self.cell(c)));
        }
        let n_facets = self.boundary_facets.len();
        self.facet_diameters = Vec::with_capacity(n_facets);
        self.facet_measures = Vec::with_capacity(n_facets);
        for e in 0..n_facets {
            let verts = self.boundary_facets[e].vertices.clone();
            let h_e = self.longest_edge(&verts);
            let measure = self.facet_measure_of(&verts);
            if !(measure > T::zero()) {
                return Err(MeshError::DegenerateFacet { facet: e });
            }
            self.facet_diameters.push(h_e);
            self.facet_measures.push(measure);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn n_boundary_facets(&self) -> usize {
        self.boundary_facets.len()
    }

    pub fn vertex(&self, i: usize) -> &[T] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (self.dim + 1)..(c + 1) * (self.dim + 1)]
    }

    pub fn boundary_facet(&self, e: usize) -> &BoundaryFacet {
        &self.boundary_facets[e]
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    /// Longest edge of cell `c` (equals the simplex diameter).
    pub fn cell_diameter(&self, c: usize) -> T {
        self.cell_diameters[c]
    }

    /// Diameter of boundary facet `e` (edge length in 2D).
    pub fn facet_diameter(&self, e: usize) -> T {
        self.facet_diameters[e]
    }

    pub fn cell_volume(&self, c: usize) -> T {
        self.cell_volumes[c]
    }

    /// Length (2D) or area (3D) of boundary facet `e`.
    pub fn facet_measure(&self, e: usize) -> T {
        self.facet_measures[e]
    }

    /// `h := max_K h_K`.
    pub fn mesh_size(&self) -> T {
        self.cell_diameters
            .iter()
            .cloned()
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn total_volume(&self) -> T {
        self.cell_volumes.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    pub fn cell_centroid(&self, c: usize) -> [T; 3] {
        let mut centroid = [T::zero(); 3];
        let cell = self.cell(c);
        let inv = T::one() / T::from_index(cell.len());
        for &v in cell {
            let x = self.vertex(v);
            for d in 0..self.dim {
                centroid[d] = centroid[d] + x[d] * inv;
            }
        }
        centroid
    }

    pub fn facet_centroid(&self, e: usize) -> [T; 3] {
        let mut centroid = [T::zero(); 3];
        let verts = &self.boundary_facets[e].vertices;
        let inv = T::one() / T::from_index(verts.len());
        for &v in verts {
            let x = self.vertex(v);
            for d in 0..self.dim {
                centroid[d] = centroid[d] + x[d] * inv;
            }
        }
        centroid
    }

    fn signed_volume(&self, c: usize) -> T {
        let cell = self.cell(c);
        let v0 = self.vertex(cell[0]);
        match self.dim {
            2 => {
                let a = self.vertex(cell[1]);
                let b = self.vertex(cell[2]);
                let ax = a[0] - v0[0];
                let ay = a[1] - v0[1];
                let bx = b[0] - v0[0];
                let by = b[1] - v0[1];
                (ax * by - ay * bx) / T::lit(2.0)
            }
            3 => {
                let mut m = [[T::zero(); 3]; 3];
                for k in 0..3 {
                    let vk = self.vertex(cell[k + 1]);
                    for d in 0..3 {
                        m[k][d] = vk[d] - v0[d];
                    }
                }
                let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                det / T::lit(6.0)
            }
            _ => unreachable!(),
        }
    }

    fn longest_edge(&self, verts: &[usize]) -> T {
        let mut h = T::zero();
        for i in 0..verts.len() {
            for j in (i + 1)..verts.len() {
                let a = self.vertex(verts[i]);
                let b = self.vertex(verts[j]);
                let mut d2 = T::zero();
                for d in 0..self.dim {
                    let t = a[d] - b[d];
                    d2 = d2 + t * t;
                }
                h = h.max(d2.sqrt());
            }
        }
        h
    }

    fn facet_measure_of(&self, verts: &[usize]) -> T {
        match self.dim {
            2 => {
                let a = self.vertex(verts[0]);
                let b = self.vertex(verts[1]);
                let mut d2 = T::zero();
                for d in 0..2 {
                    let t = a[d] - b[d];
                    d2 = d2 + t * t;
                }
                d2.sqrt()
            }
            3 => {
                let a = self.vertex(verts[0]);
                let b = self.vertex(verts[1]);
                let c = self.vertex(verts[2]);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let n = cross(u, v);
                norm3(n) / T::lit(2.0)
            }
            _ => unreachable!(),
        }
    }

    /// Outward orthonormal frame of boundary facet `e`.
    ///
    /// Deterministic: a pure function of the facet vertex coordinates and the
    /// owning cell centroid. Errors on degenerate facets.
    pub fn facet_frame(&self, e: usize) -> Result<FacetFrame<T>, MeshError> {
        let facet = &self.boundary_facets[e];
        let verts = &facet.vertices;
        let mut normal = [T::zero(); 3];
        match self.dim {
            2 => {
                let a = self.vertex(verts[0]);
                let b = self.vertex(verts[1]);
                let tx = b[0] - a[0];
                let ty = b[1] - a[1];
                let len = (tx * tx + ty * ty).sqrt();
                if !(len > T::zero()) {
                    return Err(MeshError::DegenerateFacet { facet: e });
                }
                // Either perpendicular; orientation fixed below.
                normal[0] = ty / len;
                normal[1] = -tx / len;
            }
            3 => {
                let a = self.vertex(verts[0]);
                let b = self.vertex(verts[1]);
                let c = self.vertex(verts[2]);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let n = cross(u, v);
                let len = norm3(n);
                if !(len > T::zero()) {
                    return Err(MeshError::DegenerateFacet { facet: e });
                }
                for d in 0..3 {
                    normal[d] = n[d] / len;
                }
            }
            _ => unreachable!(),
        }
        // Point out of the owning cell.
        let fc = self.facet_centroid(e);
        let cc = self.cell_centroid(facet.cell);
        let mut dot = T::zero();
        for d in 0..self.dim {
            dot = dot + normal[d] * (fc[d] - cc[d]);
        }
        if dot < T::zero() {
            for d in 0..self.dim {
                normal[d] = -normal[d];
            }
        }

        let mut tangents = [[T::zero(); 3]; 2];
        if self.dim == 2 {
            // rot90ccw(n)
            tangents[0][0] = -normal[1];
            tangents[0][1] = normal[0];
        } else {
            // Axis minimizing |n . e_a|, smallest index on ties.
            let mut axis = 0;
            let mut best = normal[0].abs();
            for a in 1..3 {
                if normal[a].abs() < best {
                    best = normal[a].abs();
                    axis = a;
                }
            }
            let mut e_a = [T::zero(); 3];
            e_a[axis] = T::one();
            let t1 = cross(normal, e_a);
            let len = norm3(t1);
            for d in 0..3 {
                tangents[0][d] = t1[d] / len;
            }
            let t2 = cross(normal, tangents[0]);
            tangents[1] = t2;
        }
        Ok(FacetFrame {
            dim: self.dim,
            normal,
            tangents,
        })
    }

    /// Local reference coordinates of the facet vertices within the owning
    /// cell, i.e. which local cell vertices span the facet.
    pub fn facet_local_vertices(&self, e: usize) -> Vec<usize> {
        let facet = &self.boundary_facets[e];
        let cell = self.cell(facet.cell);
        facet
            .vertices
            .iter()
            .map(|v| cell.iter().position(|cv| cv == v).expect("facet vertex in owning cell"))
            .collect()
    }
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3<T: Real>(a: [T; 3]) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
