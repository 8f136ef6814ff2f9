//! Structured mesh generators.
//!
//! Squares are split into two triangles along the same diagonal direction
//! (lower-left to upper-right); cubes are split into six tetrahedra sharing
//! the main diagonal (Kuhn split). The `tagger` receives the centroid of
//! each boundary facet and decides its [`BoundaryTag`].

use super::{BoundaryTag, SimplicialMesh};
use crate::Real;

/// Uniform triangulation of the rectangle `bbox = (xmin, ymin, xmax, ymax)`
/// with an `n x n` grid of squares, each split into two right triangles.
pub fn generate_structured_square<T: Real>(
    n: usize,
    bbox: (T, T, T, T),
    tagger: impl Fn(&[T]) -> BoundaryTag,
) -> SimplicialMesh<T> {
    assert!(n >= 1, "grid resolution must be at least 1");
    let (xmin, ymin, xmax, ymax) = bbox;
    assert!(xmax > xmin && ymax > ymin, "bbox must be non-degenerate");

    let nv = n + 1;
    let dx = (xmax - xmin) / T::from_index(n);
    let dy = (ymax - ymin) / T::from_index(n);
    let mut vertices = Vec::with_capacity(nv * nv * 2);
    for j in 0..nv {
        for i in 0..nv {
            vertices.push(xmin + dx * T::from_index(i));
            vertices.push(ymin + dy * T::from_index(j));
        }
    }
    let vid = |i: usize, j: usize| j * nv + i;

    let mut cells = Vec::with_capacity(n * n * 6);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            cells.extend_from_slice(&[v00, v10, v01]);
            cells.extend_from_slice(&[v10, v11, v01]);
        }
    }

    let mut facets = Vec::with_capacity(4 * n);
    let half = T::lit(0.5);
    let mut tag_edge = |a: usize, b: usize, vertices: &[T]| {
        let centroid = [
            (vertices[a * 2] + vertices[b * 2]) * half,
            (vertices[a * 2 + 1] + vertices[b * 2 + 1]) * half,
        ];
        facets.push((tagger(&centroid), vec![a, b]));
    };
    for i in 0..n {
        tag_edge(vid(i, 0), vid(i + 1, 0), &vertices);
        tag_edge(vid(i + 1, n), vid(i, n), &vertices);
    }
    for j in 0..n {
        tag_edge(vid(n, j), vid(n, j + 1), &vertices);
        tag_edge(vid(0, j + 1), vid(0, j), &vertices);
    }

    SimplicialMesh::new(2, vertices, cells, facets).expect("structured square mesh is valid")
}

/// Uniform tetrahedral mesh of the box `bbox = (xmin, ymin, zmin, xmax,
/// ymax, zmax)`: `n^3` cubes, each split into six tetrahedra.
pub fn generate_structured_cube<T: Real>(
    n: usize,
    bbox: (T, T, T, T, T, T),
    tagger: impl Fn(&[T]) -> BoundaryTag,
) -> SimplicialMesh<T> {
    assert!(n >= 1, "grid resolution must be at least 1");
    let (xmin, ymin, zmin, xmax, ymax, zmax) = bbox;
    assert!(
        xmax > xmin && ymax > ymin && zmax > zmin,
        "bbox must be non-degenerate"
    );

    let nv = n + 1;
    let d = [
        (xmax - xmin) / T::from_index(n),
        (ymax - ymin) / T::from_index(n),
        (zmax - zmin) / T::from_index(n),
    ];
    let origin = [xmin, ymin, zmin];
    let mut vertices = Vec::with_capacity(nv * nv * nv * 3);
    for k in 0..nv {
        for j in 0..nv {
            for i in 0..nv {
                vertices.push(origin[0] + d[0] * T::from_index(i));
                vertices.push(origin[1] + d[1] * T::from_index(j));
                vertices.push(origin[2] + d[2] * T::from_index(k));
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| (k * nv + j) * nv + i;

    // Kuhn split: one tet per permutation of the axes, all sharing the
    // cube's main diagonal. Vertex orders fixed so volumes are positive.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut cells = Vec::with_capacity(n * n * n * 24);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMS {
                    let mut corner = [i, j, k];
                    let mut tet = [vid(corner[0], corner[1], corner[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        tet[step + 1] = vid(corner[0], corner[1], corner[2]);
                    }
                    // Odd permutations produce negative volume; swap to fix.
                    if perm_is_odd(perm) {
                        tet.swap(1, 2);
                    }
                    cells.extend_from_slice(&tet);
                }
            }
        }
    }

    // Boundary faces: on each box face, every surface square splits into two
    // triangles matching the Kuhn tetra faces (diagonal from the low corner).
    let mut facets = Vec::new();
    let third = T::one() / T::lit(3.0);
    let mut push_tri = |a: usize, b: usize, c: usize, vertices: &[T]| {
        let centroid = [
            (vertices[a * 3] + vertices[b * 3] + vertices[c * 3]) * third,
            (vertices[a * 3 + 1] + vertices[b * 3 + 1] + vertices[c * 3 + 1]) * third,
            (vertices[a * 3 + 2] + vertices[b * 3 + 2] + vertices[c * 3 + 2]) * third,
        ];
        facets.push((tagger(&centroid), vec![a, b, c]));
    };
    for b in 0..n {
        for a in 0..n {
            // z = zmin and z = zmax
            push_tri(vid(a, b, 0), vid(a + 1, b, 0), vid(a + 1, b + 1, 0), &vertices);
            push_tri(vid(a, b, 0), vid(a + 1, b + 1, 0), vid(a, b + 1, 0), &vertices);
            push_tri(vid(a, b, n), vid(a + 1, b, n), vid(a + 1, b + 1, n), &vertices);
            push_tri(vid(a, b, n), vid(a + 1, b + 1, n), vid(a, b + 1, n), &vertices);
            // y = ymin and y = ymax
            push_tri(vid(a, 0, b), vid(a + 1, 0, b), vid(a + 1, 0, b + 1), &vertices);
            push_tri(vid(a, 0, b), vid(a + 1, 0, b + 1), vid(a, 0, b + 1), &vertices);
            push_tri(vid(a, n, b), vid(a + 1, n, b), vid(a + 1, n, b + 1), &vertices);
            push_tri(vid(a, n, b), vid(a + 1, n, b + 1), vid(a, n, b + 1), &vertices);
            // x = xmin and x = xmax
            push_tri(vid(0, a, b), vid(0, a + 1, b), vid(0, a + 1, b + 1), &vertices);
            push_tri(vid(0, a, b), vid(0, a + 1, b + 1), vid(0, a, b + 1), &vertices);
            push_tri(vid(n, a, b), vid(n, a + 1, b), vid(n, a + 1, b + 1), &vertices);
            push_tri(vid(n, a, b), vid(n, a + 1, b + 1), vid(n, a, b + 1), &vertices);
        }
    }

    SimplicialMesh::new(3, vertices, cells, facets).expect("structured cube mesh is valid")
}

fn perm_is_odd(perm: [usize; 3]) -> bool {
    let mut inversions = 0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}
