//! Continuous Lagrange finite element spaces of degree 1 and 2 on
//! simplicial meshes, together with quadrature and discrete fields.
//!
//! Scalar degrees of freedom sit at Lagrange nodes (vertices, plus edge
//! midpoints for degree 2). Vector-valued spaces interleave components per
//! node: the coefficient of component `c` at node `i` is `coeffs[i * n_components + c]`.

mod quadrature;
mod reference;

pub use quadrature::{gauss_legendre_unit, monomial_integral, quadrature_for, QuadratureError, QuadratureRule};
pub use reference::{
    eval_ref_basis, local_node_coords, n_local_nodes, simplex_edges, CellGeometry, RefBasis,
};

use crate::mesh::{MeshError, SimplicialMesh};
use crate::Real;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("unsupported polynomial degree {0} (supported: 1, 2)")]
    UnsupportedDegree(usize),
    #[error("point {0:?} lies outside the reference simplex")]
    PointOutsideReference(Vec<f64>),
    #[error("field belongs to a different function space")]
    SpaceMismatch,
    #[error("callable returned {got} components, space has {expected}")]
    BadComponentCount { got: usize, expected: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A scalar- or vector-valued C0 Lagrange space on a mesh.
#[derive(Debug)]
pub struct FunctionSpace<T> {
    mesh: Arc<SimplicialMesh<T>>,
    degree: usize,
    n_components: usize,
    n_nodes: usize,
    /// Flat node coordinates, `n_nodes * dim`.
    node_coords: Vec<T>,
    /// Flat cell-to-node map, `n_cells * nodes_per_cell`.
    cell_nodes: Vec<usize>,
    /// Flat boundary-facet-to-node map, `n_boundary_facets * nodes_per_facet`.
    facet_nodes: Vec<usize>,
}

impl<T: Real> FunctionSpace<T> {
    pub fn new(
        mesh: Arc<SimplicialMesh<T>>,
        degree: usize,
        n_components: usize,
    ) -> Result<Self, FemError> {
        if !(1..=2).contains(&degree) {
            return Err(FemError::UnsupportedDegree(degree));
        }
        let dim = mesh.dim();
        let n_vertices = mesh.n_vertices();
        let mut node_coords: Vec<T> = Vec::new();
        for v in 0..n_vertices {
            node_coords.extend_from_slice(mesh.vertex(v));
        }

        // Edge nodes for degree 2, ids assigned in deterministic cell order.
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let nodes_per_cell = n_local_nodes(dim, degree);
        let mut cell_nodes = Vec::with_capacity(mesh.n_cells() * nodes_per_cell);
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            cell_nodes.extend_from_slice(cell);
            if degree == 2 {
                for &(a, b) in simplex_edges(dim) {
                    let key = ordered(cell[a], cell[b]);
                    let next_id = n_vertices + edge_ids.len();
                    let id = *edge_ids.entry(key).or_insert(next_id);
                    if id == next_id && node_coords.len() / dim == id {
                        let half = T::lit(0.5);
                        let pa = mesh.vertex(key.0);
                        let pb = mesh.vertex(key.1);
                        for d in 0..dim {
                            node_coords.push((pa[d] + pb[d]) * half);
                        }
                    }
                    cell_nodes.push(id);
                }
            }
        }
        let n_nodes = node_coords.len() / dim;

        let nodes_per_facet = facet_node_count(dim, degree);
        let mut facet_nodes = Vec::with_capacity(mesh.n_boundary_facets() * nodes_per_facet);
        for facet in mesh.boundary_facets() {
            facet_nodes.extend_from_slice(&facet.vertices);
            if degree == 2 {
                match dim {
                    2 => {
                        let key = ordered(facet.vertices[0], facet.vertices[1]);
                        facet_nodes.push(edge_ids[&key]);
                    }
                    _ => {
                        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                            let key = ordered(facet.vertices[a], facet.vertices[b]);
                            facet_nodes.push(edge_ids[&key]);
                        }
                    }
                }
            }
        }

        Ok(FunctionSpace {
            mesh,
            degree,
            n_components,
            n_nodes,
            node_coords,
            cell_nodes,
            facet_nodes,
        })
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh<T>> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    /// Number of scalar Lagrange nodes.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of scalar degrees of freedom (`n_nodes * n_components`).
    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.n_components
    }

    pub fn node_coord(&self, node: usize) -> &[T] {
        let dim = self.mesh.dim();
        &self.node_coords[node * dim..(node + 1) * dim]
    }

    pub fn nodes_per_cell(&self) -> usize {
        n_local_nodes(self.mesh.dim(), self.degree)
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        let n = self.nodes_per_cell();
        &self.cell_nodes[cell * n..(cell + 1) * n]
    }

    pub fn nodes_per_facet(&self) -> usize {
        facet_node_count(self.mesh.dim(), self.degree)
    }

    /// Global scalar nodes on boundary facet `e` (a subset of the owning
    /// cell's nodes).
    pub fn facet_nodes(&self, facet: usize) -> &[usize] {
        let n = self.nodes_per_facet();
        &self.facet_nodes[facet * n..(facet + 1) * n]
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry<T> {
        let verts: Vec<&[T]> = self.mesh.cell(cell).iter().map(|&v| self.mesh.vertex(v)).collect();
        CellGeometry::new(self.mesh.dim(), &verts)
    }

    /// Values, physical gradients and physical second derivatives of all
    /// local basis functions of `cell` at a reference point.
    pub fn eval_basis(&self, cell: usize, ref_point: &[T]) -> Result<RefBasis<T>, FemError> {
        let dim = self.mesh.dim();
        let mut bary0 = T::one();
        for d in 0..dim {
            let tol = T::lit(1e-12);
            if ref_point[d] < -tol {
                return Err(FemError::PointOutsideReference(
                    ref_point.iter().map(|x| x.as_f64()).collect(),
                ));
            }
            bary0 = bary0 - ref_point[d];
        }
        if bary0 < -T::lit(1e-12) {
            return Err(FemError::PointOutsideReference(
                ref_point.iter().map(|x| x.as_f64()).collect(),
            ));
        }
        let mut basis = eval_ref_basis(dim, self.degree, ref_point);
        self.cell_geometry(cell).push_forward(&mut basis);
        Ok(basis)
    }

    /// Nodal interpolation: the callable receives a physical point and must
    /// return `n_components` values.
    pub fn interpolate(
        &self,
        f: impl Fn(&[T]) -> Vec<T>,
    ) -> Result<DiscreteField<T>, FemError>
    where
        Self: Sized,
    {
        let mut coeffs = vec![T::zero(); self.n_dofs()];
        for node in 0..self.n_nodes {
            let values = f(self.node_coord(node));
            if values.len() != self.n_components {
                return Err(FemError::BadComponentCount {
                    got: values.len(),
                    expected: self.n_components,
                });
            }
            for (c, v) in values.into_iter().enumerate() {
                coeffs[node * self.n_components + c] = v;
            }
        }
        Ok(DiscreteField {
            space: SpaceRef::checkless(self),
            coeffs,
        })
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn facet_node_count(dim: usize, degree: usize) -> usize {
    match (dim, degree) {
        (2, 1) => 2,
        (2, 2) => 3,
        (3, 1) => 3,
        (3, 2) => 6,
        _ => unreachable!(),
    }
}

/// Identity of the space a field lives on, without holding an `Arc` cycle:
/// fields created through [`Spaces`] carry the arc, fields created from a
/// bare `&FunctionSpace` only record the fingerprint used for mismatch
/// detection.
#[derive(Clone, Debug)]
pub struct SpaceRef {
    pub degree: usize,
    pub n_components: usize,
    pub n_dofs: usize,
    pub mesh_cells: usize,
}

impl SpaceRef {
    fn checkless<T: Real>(space: &FunctionSpace<T>) -> Self {
        SpaceRef {
            degree: space.degree,
            n_components: space.n_components,
            n_dofs: space.n_dofs(),
            mesh_cells: space.mesh.n_cells(),
        }
    }

    pub fn matches<T: Real>(&self, space: &FunctionSpace<T>) -> bool {
        self.degree == space.degree
            && self.n_components == space.n_components
            && self.n_dofs == space.n_dofs()
            && self.mesh_cells == space.mesh.n_cells()
    }
}

/// Coefficient vector over a function space.
#[derive(Clone, Debug)]
pub struct DiscreteField<T> {
    pub space: SpaceRef,
    pub coeffs: Vec<T>,
}

impl<T: Real> DiscreteField<T> {
    pub fn zeros(space: &FunctionSpace<T>) -> Self {
        DiscreteField {
            space: SpaceRef::checkless(space),
            coeffs: vec![T::zero(); space.n_dofs()],
        }
    }

    pub fn from_coeffs(space: &FunctionSpace<T>, coeffs: Vec<T>) -> Result<Self, FemError> {
        if coeffs.len() != space.n_dofs() {
            return Err(FemError::SpaceMismatch);
        }
        Ok(DiscreteField {
            space: SpaceRef::checkless(space),
            coeffs,
        })
    }

    /// Component values at a point given the evaluated local basis.
    pub fn value_at(
        &self,
        space: &FunctionSpace<T>,
        cell: usize,
        basis: &RefBasis<T>,
        out: &mut [T],
    ) {
        let nc = space.n_components();
        for v in out.iter_mut().take(nc) {
            *v = T::zero();
        }
        for (k, &node) in space.cell_nodes(cell).iter().enumerate() {
            for c in 0..nc {
                out[c] = out[c] + self.coeffs[node * nc + c] * basis.values[k];
            }
        }
    }

    /// Component gradients `out[c][d] = d u_c / d x_d`.
    pub fn gradient_at(
        &self,
        space: &FunctionSpace<T>,
        cell: usize,
        basis: &RefBasis<T>,
        out: &mut [[T; 3]; 3],
    ) {
        let nc = space.n_components();
        let dim = basis.dim;
        for row in out.iter_mut() {
            *row = [T::zero(); 3];
        }
        for (k, &node) in space.cell_nodes(cell).iter().enumerate() {
            for c in 0..nc {
                let coeff = self.coeffs[node * nc + c];
                for d in 0..dim {
                    out[c][d] = out[c][d] + coeff * basis.gradients[k * dim + d];
                }
            }
        }
    }
}

/// Velocity/pressure pair of equal-order spaces on one mesh.
#[derive(Debug, Clone)]
pub struct Spaces<T> {
    pub velocity: Arc<FunctionSpace<T>>,
    pub pressure: Arc<FunctionSpace<T>>,
}

impl<T: Real> Spaces<T> {
    pub fn equal_order(mesh: Arc<SimplicialMesh<T>>, degree: usize) -> Result<Self, FemError> {
        let dim = mesh.dim();
        let velocity = Arc::new(FunctionSpace::new(mesh.clone(), degree, dim)?);
        let pressure = Arc::new(FunctionSpace::new(mesh, degree, 1)?);
        Ok(Spaces { velocity, pressure })
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh<T>> {
        self.velocity.mesh()
    }

    pub fn degree(&self) -> usize {
        self.velocity.degree()
    }
}

/// Quadrature data for one boundary facet: points in the owning cell's
/// reference coordinates, physical points and surface-measure weights.
pub struct FacetQuadrature<T> {
    pub cell: usize,
    pub n_points: usize,
    pub ref_points: Vec<T>,
    pub phys_points: Vec<T>,
    pub weights: Vec<T>,
}

pub fn facet_quadrature<T: Real>(
    mesh: &SimplicialMesh<T>,
    facet: usize,
    degree: usize,
) -> Result<FacetQuadrature<T>, FemError> {
    let dim = mesh.dim();
    let bf = mesh.boundary_facet(facet);
    let verts: Vec<&[T]> = mesh.cell(bf.cell).iter().map(|&v| mesh.vertex(v)).collect();
    let geom = CellGeometry::new(dim, &verts);
    let measure = mesh.facet_measure(facet);

    let mut out = FacetQuadrature {
        cell: bf.cell,
        n_points: 0,
        ref_points: Vec::new(),
        phys_points: Vec::new(),
        weights: Vec::new(),
    };
    let a = mesh.vertex(bf.vertices[0]);
    match dim {
        2 => {
            let rule: QuadratureRule<T> = quadrature_for(1, degree)?;
            let b = mesh.vertex(bf.vertices[1]);
            for q in 0..rule.len() {
                let t = rule.point(q)[0];
                let x = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
                let mut xi = [T::zero(); 2];
                geom.phys_to_ref(&x, &mut xi);
                out.ref_points.extend_from_slice(&xi);
                out.phys_points.extend_from_slice(&x);
                // unit-segment weights sum to 1
                out.weights.push(rule.weights[q] * measure);
            }
            out.n_points = rule.len();
        }
        3 => {
            let rule: QuadratureRule<T> = quadrature_for(2, degree)?;
            let b = mesh.vertex(bf.vertices[1]);
            let c = mesh.vertex(bf.vertices[2]);
            let two = T::lit(2.0);
            for q in 0..rule.len() {
                let p = rule.point(q);
                let mut x = [T::zero(); 3];
                for d in 0..3 {
                    x[d] = a[d] + (b[d] - a[d]) * p[0] + (c[d] - a[d]) * p[1];
                }
                let mut xi = [T::zero(); 3];
                geom.phys_to_ref(&x, &mut xi);
                out.ref_points.extend_from_slice(&xi);
                out.phys_points.extend_from_slice(&x);
                // reference-triangle weights sum to 1/2
                out.weights.push(rule.weights[q] * two * measure);
            }
            out.n_points = rule.len();
        }
        _ => unreachable!(),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_square, BoundaryTag};
    use crate::rng::SplitMix64;

    fn square(n: usize) -> Arc<SimplicialMesh<f64>> {
        Arc::new(generate_structured_square(n, (-1.0, -1.0, 1.0, 1.0), |_| {
            BoundaryTag::Dirichlet
        }))
    }

    #[test]
    fn p1_node_count_matches_vertices() {
        let mesh = square(4);
        let space = FunctionSpace::new(mesh.clone(), 1, 2).unwrap();
        assert_eq!(space.n_nodes(), mesh.n_vertices());
        assert_eq!(space.n_dofs(), 2 * mesh.n_vertices());
    }

    #[test]
    fn p2_node_count_matches_vertices_plus_edges() {
        let mesh = square(3);
        let space = FunctionSpace::new(mesh.clone(), 2, 1).unwrap();
        // Euler: structured n=3 grid has 16 vertices, 18 cells, 33 edges.
        assert_eq!(space.n_nodes(), 16 + 33);
        // every facet's nodes are a subset of the owning cell's nodes
        for e in 0..mesh.n_boundary_facets() {
            let cell_nodes = space.cell_nodes(mesh.boundary_facet(e).cell);
            for node in space.facet_nodes(e) {
                assert!(cell_nodes.contains(node));
            }
        }
    }

    #[test]
    fn interpolation_reproduces_cavity_exact_solution_at_nodes() {
        let mesh = square(5);
        let space = FunctionSpace::new(mesh, 1, 2).unwrap();
        let exact = |x: &[f64]| {
            vec![
                2.0 * x[1] * (1.0 - x[0] * x[0]),
                -2.0 * x[0] * (1.0 - x[1] * x[1]),
            ]
        };
        let field = space.interpolate(exact).unwrap();
        for node in 0..space.n_nodes() {
            let x = space.node_coord(node);
            let u = exact(x);
            for c in 0..2 {
                assert!((field.coeffs[node * 2 + c] - u[c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_interpolates_to_zero() {
        let mesh = square(2);
        let space = FunctionSpace::new(mesh, 2, 1).unwrap();
        let field = space.interpolate(|_| vec![0.0]).unwrap();
        assert!(field.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn p1_reproduces_affine_functions_pointwise() {
        let mesh = square(3);
        let space = FunctionSpace::new(mesh.clone(), 1, 1).unwrap();
        let affine = |x: &[f64]| vec![0.75 - 1.5 * x[0] + 2.25 * x[1]];
        let field = space.interpolate(affine).unwrap();
        let mut rng = SplitMix64::new(7);
        for _ in 0..50 {
            let cell = (rng.next_u64() % mesh.n_cells() as u64) as usize;
            let mut xi = [rng.next_f64(), rng.next_f64()];
            if xi[0] + xi[1] > 1.0 {
                xi = [1.0 - xi[0], 1.0 - xi[1]];
            }
            let basis = space.eval_basis(cell, &xi).unwrap();
            let mut value = [0.0];
            field.value_at(&space, cell, &basis, &mut value);
            let geom = space.cell_geometry(cell);
            let mut x = [0.0; 2];
            geom.ref_to_phys(&xi, &mut x);
            assert!((value[0] - affine(&x)[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn c0_continuity_across_interior_facets() {
        let mesh = square(4);
        let space = FunctionSpace::new(mesh.clone(), 2, 1).unwrap();
        let mut rng = SplitMix64::new(42);
        let coeffs: Vec<f64> = (0..space.n_dofs()).map(|_| rng.next_pm1()).collect();
        let field = DiscreteField::from_coeffs(&space, coeffs).unwrap();

        // find interior faces: shared by two cells
        let mut face_cells: std::collections::HashMap<Vec<usize>, Vec<usize>> =
            std::collections::HashMap::new();
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            for skip in 0..3 {
                let mut face: Vec<usize> =
                    (0..3).filter(|&k| k != skip).map(|k| cell[k]).collect();
                face.sort_unstable();
                face_cells.entry(face).or_default().push(c);
            }
        }
        let mut checked = 0;
        for (face, owners) in face_cells {
            if owners.len() != 2 {
                continue;
            }
            let a = mesh.vertex(face[0]);
            let b = mesh.vertex(face[1]);
            for t in [0.21f64, 0.5, 0.83] {
                let x = [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
                let mut values = Vec::new();
                for &cell in &owners {
                    let geom = space.cell_geometry(cell);
                    let mut xi = [0.0; 2];
                    geom.phys_to_ref(&x, &mut xi);
                    let basis = space.eval_basis(cell, &xi).unwrap();
                    let mut value = [0.0];
                    field.value_at(&space, cell, &basis, &mut value);
                    values.push(value[0]);
                }
                assert!((values[0] - values[1]).abs() < 1e-12);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn facet_quadrature_integrates_arc_length() {
        let mesh = square(4);
        for e in 0..mesh.n_boundary_facets() {
            let fq = facet_quadrature(&mesh, e, 4).unwrap();
            let total: f64 = fq.weights.iter().sum();
            assert!((total - mesh.facet_measure(e)).abs() < 1e-14);
        }
    }

    #[test]
    fn unsupported_degree_is_an_error() {
        let mesh = square(1);
        assert!(matches!(
            FunctionSpace::new(mesh, 3, 1),
            Err(FemError::UnsupportedDegree(3))
        ));
    }
}
