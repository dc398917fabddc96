//! Simplicial spatial meshes (1D intervals, 2D triangles).
//!
//! Meshes are immutable after construction. They carry the facet and vertex
//! adjacency needed by tent pitching and DG assembly: interior facets store
//! the two neighbouring elements and a fixed unit normal (pointing out of
//! `elem_plus` into `elem_minus`), boundary facets store the single element
//! and the outward normal of the domain.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const DEGENERACY_TOL: f64 = 1e-14;

/// Facet shared by two elements. In 1D the facet is a single vertex and both
/// entries of `vertices` coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorFacet {
    pub vertices: [usize; 2],
    pub elem_plus: usize,
    pub elem_minus: usize,
    /// Unit normal pointing out of `elem_plus`.
    pub normal: [f64; 2],
}

/// Facet on the domain boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 2],
    pub element: usize,
    /// Outward unit normal of the domain.
    pub normal: [f64; 2],
    pub marker: i64,
}

/// Constant per-element geometry of the affine map from the reference simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    /// |det J|; equals the element length in 1D and twice the area in 2D.
    pub jdet: f64,
    /// Transposed inverse Jacobian (second row zero in 1D).
    pub jinv_t: [[f64; 2]; 2],
    /// First vertex coordinate, the image of the reference origin.
    pub origin: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct SpatialMesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    element_vertices: Vec<usize>,
    interior_facets: Vec<InteriorFacet>,
    boundary_facets: Vec<BoundaryFacet>,
    vertex_to_elements: Vec<Vec<usize>>,
    vertex_to_vertices: Vec<Vec<usize>>,
}

impl SpatialMesh {
    /// Build a mesh from raw vertex and element lists, deriving facets and
    /// adjacency. Fails on degenerate or non-conforming input.
    pub fn from_cells(dim: usize, vertices: Vec<[f64; 2]>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(format!("unsupported dimension {dim}")));
        }
        let nv = dim + 1;
        let mut element_vertices = Vec::with_capacity(cells.len() * nv);
        for (e, cell) in cells.iter().enumerate() {
            if cell.len() != nv {
                return Err(Error::invalid(format!(
                    "element {e} has {} vertices, expected {nv}",
                    cell.len()
                )));
            }
            for &v in cell {
                if v >= vertices.len() {
                    return Err(Error::invalid(format!("element {e} references vertex {v}")));
                }
                element_vertices.push(v);
            }
        }
        let mut mesh = SpatialMesh {
            dim,
            vertices,
            element_vertices,
            interior_facets: Vec::new(),
            boundary_facets: Vec::new(),
            vertex_to_elements: Vec::new(),
            vertex_to_vertices: Vec::new(),
        };
        for e in 0..mesh.n_elements() {
            let m = mesh.element_measure(e);
            if !(m > DEGENERACY_TOL) {
                return Err(Error::SingularGeometry {
                    element: e,
                    measure: m,
                });
            }
        }
        mesh.build_adjacency()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.element_vertices.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.element_vertices[e * nv..(e + 1) * nv]
    }

    pub fn interior_facets(&self) -> &[InteriorFacet] {
        &self.interior_facets
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn vertex_to_elements(&self, v: usize) -> &[usize] {
        &self.vertex_to_elements[v]
    }

    pub fn vertex_to_vertices(&self, v: usize) -> &[usize] {
        &self.vertex_to_vertices[v]
    }

    /// Union of elements containing `v`, the spatial footprint of a tent.
    pub fn vertex_patch(&self, v: usize) -> &[usize] {
        &self.vertex_to_elements[v]
    }

    /// Length in 1D, area in 2D.
    pub fn element_measure(&self, e: usize) -> f64 {
        let vs = self.element(e);
        match self.dim {
            1 => (self.vertices[vs[1]][0] - self.vertices[vs[0]][0]).abs(),
            _ => {
                let [a, b, c] = [self.vertices[vs[0]], self.vertices[vs[1]], self.vertices[vs[2]]];
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
            }
        }
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        let vs = self.element(e);
        let mut d: f64 = 0.0;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d = d.max(dist(self.vertices[vs[i]], self.vertices[vs[j]]));
            }
        }
        d
    }

    /// Mesh size h = max element diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_diameter(e))
            .fold(0.0, f64::max)
    }

    pub fn domain_measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_measure(e)).sum()
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        let vs = self.element(e);
        let a = self.vertices[vs[0]];
        match self.dim {
            1 => {
                let len = self.vertices[vs[1]][0] - a[0];
                ElementGeometry {
                    jdet: len.abs(),
                    jinv_t: [[1.0 / len, 0.0], [0.0, 0.0]],
                    origin: a,
                }
            }
            _ => {
                let b = self.vertices[vs[1]];
                let c = self.vertices[vs[2]];
                let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                // inv(J)^T = adj(J)^T / det
                let jinv_t = [
                    [j[1][1] / det, -j[1][0] / det],
                    [-j[0][1] / det, j[0][0] / det],
                ];
                ElementGeometry {
                    jdet: det.abs(),
                    jinv_t,
                    origin: a,
                }
            }
        }
    }

    /// Reference coordinates of a physical point with respect to element `e`.
    pub fn to_reference(&self, e: usize, x: [f64; 2]) -> [f64; 2] {
        let g = self.geometry(e);
        let d = [x[0] - g.origin[0], x[1] - g.origin[1]];
        match self.dim {
            1 => [d[0] * g.jinv_t[0][0], 0.0],
            _ => {
                // xi = J^{-1} d, with jinv_t = (J^{-1})^T
                [
                    g.jinv_t[0][0] * d[0] + g.jinv_t[1][0] * d[1],
                    g.jinv_t[0][1] * d[0] + g.jinv_t[1][1] * d[1],
                ]
            }
        }
    }

    /// Gradients of the barycentric (hat) functions of the element vertices,
    /// one per local vertex, constant over the element.
    pub fn hat_gradients(&self, e: usize) -> [[f64; 2]; 3] {
        let g = self.geometry(e);
        match self.dim {
            1 => {
                let s = g.jinv_t[0][0];
                [[-s, 0.0], [s, 0.0], [0.0, 0.0]]
            }
            _ => {
                // reference hats 1-xi-eta, xi, eta mapped by J^{-T}
                let gx = |rx: f64, ry: f64| {
                    [
                        g.jinv_t[0][0] * rx + g.jinv_t[0][1] * ry,
                        g.jinv_t[1][0] * rx + g.jinv_t[1][1] * ry,
                    ]
                };
                [gx(-1.0, -1.0), gx(1.0, 0.0), gx(0.0, 1.0)]
            }
        }
    }

    fn build_adjacency(&mut self) -> Result<()> {
        let nvert = self.n_vertices();
        let nelem = self.n_elements();
        let mut v2e = vec![Vec::new(); nvert];
        let mut v2v: Vec<Vec<usize>> = vec![Vec::new(); nvert];
        for e in 0..nelem {
            let vs = self.element(e).to_vec();
            for (i, &v) in vs.iter().enumerate() {
                v2e[v].push(e);
                for (j, &w) in vs.iter().enumerate() {
                    if i != j && !v2v[v].contains(&w) {
                        v2v[v].push(w);
                    }
                }
            }
        }
        for l in v2v.iter_mut() {
            l.sort_unstable();
        }
        self.vertex_to_elements = v2e;
        self.vertex_to_vertices = v2v;

        // collect facets: (sorted vertex key) -> incident (element, local facet)
        use std::collections::BTreeMap;
        let mut table: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for e in 0..nelem {
            let vs = self.element(e).to_vec();
            let keys: Vec<[usize; 2]> = match self.dim {
                1 => vec![[vs[0], vs[0]], [vs[1], vs[1]]],
                _ => vec![
                    sorted2(vs[0], vs[1]),
                    sorted2(vs[1], vs[2]),
                    sorted2(vs[2], vs[0]),
                ],
            };
            for k in keys {
                table.entry(k).or_default().push(e);
            }
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (key, elems) in table {
            match elems.len() {
                1 => {
                    let e = elems[0];
                    let normal = self.outward_normal(e, key);
                    boundary.push(BoundaryFacet {
                        vertices: key,
                        element: e,
                        normal,
                        marker: 0,
                    });
                }
                2 => {
                    let (plus, minus) = (elems[0].min(elems[1]), elems[0].max(elems[1]));
                    let normal = self.outward_normal(plus, key);
                    interior.push(InteriorFacet {
                        vertices: key,
                        elem_plus: plus,
                        elem_minus: minus,
                        normal,
                    });
                }
                n => {
                    return Err(Error::invalid(format!(
                        "facet {key:?} shared by {n} elements; mesh is not conforming"
                    )))
                }
            }
        }
        self.interior_facets = interior;
        self.boundary_facets = boundary;
        Ok(())
    }

    /// Unit normal of facet `key` pointing out of element `e`.
    fn outward_normal(&self, e: usize, key: [usize; 2]) -> [f64; 2] {
        match self.dim {
            1 => {
                let x = self.vertices[key[0]][0];
                let vs = self.element(e);
                let mid = 0.5 * (self.vertices[vs[0]][0] + self.vertices[vs[1]][0]);
                [if x > mid { 1.0 } else { -1.0 }, 0.0]
            }
            _ => {
                let a = self.vertices[key[0]];
                let b = self.vertices[key[1]];
                let t = [b[0] - a[0], b[1] - a[1]];
                let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let mut n = [t[1] / len, -t[0] / len];
                let vs = self.element(e);
                let cen = centroid(&[
                    self.vertices[vs[0]],
                    self.vertices[vs[1]],
                    self.vertices[vs[2]],
                ]);
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                if n[0] * (cen[0] - mid[0]) + n[1] * (cen[1] - mid[1]) > 0.0 {
                    n = [-n[0], -n[1]];
                }
                n
            }
        }
    }
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn centroid(p: &[[f64; 2]; 3]) -> [f64; 2] {
    [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ]
}

/// Partition [a, b] into n intervals. `grading` is the length ratio between
/// successive elements; grading < 1 shrinks elements towards `b`.
pub fn build_interval_mesh(a: f64, b: f64, n: usize, grading: f64) -> Result<SpatialMesh> {
    if !(a < b) {
        return Err(Error::invalid(format!("empty interval [{a}, {b}]")));
    }
    if n == 0 {
        return Err(Error::invalid("need at least one element"));
    }
    if !(grading > 0.0) {
        return Err(Error::invalid(format!("grading {grading} must be positive")));
    }
    // lengths proportional to grading^i, scaled to sum to b - a
    let total: f64 = (0..n).map(|i| grading.powi(i as i32)).sum();
    let scale = (b - a) / total;
    let mut vertices = Vec::with_capacity(n + 1);
    let mut x = a;
    vertices.push([x, 0.0]);
    for i in 0..n {
        x += scale * grading.powi(i as i32);
        vertices.push([x, 0.0]);
    }
    vertices[n] = [b, 0.0];
    let cells = (0..n).map(|i| vec![i, i + 1]).collect();
    SpatialMesh::from_cells(1, vertices, cells)
}

/// Structured triangulation of [0, Lx] x [0, Ly]: nx by ny cells, each split
/// along the diagonal from (i, j) to (i+1, j+1).
pub fn build_structured_triangle_mesh(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
) -> Result<SpatialMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("cell counts must be positive"));
    }
    if !(lx > 0.0 && ly > 0.0) {
        return Err(Error::invalid("domain lengths must be positive"));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SpatialMesh::from_cells(2, vertices, cells)
}

/// Gradient of the piecewise-linear interpolant of per-vertex values,
/// constant on the element.
pub fn element_gradient_of_nodal(
    mesh: &SpatialMesh,
    nodal_values: &[f64],
    element: usize,
) -> Result<[f64; 2]> {
    if element >= mesh.n_elements() {
        return Err(Error::invalid(format!("element {element} out of range")));
    }
    if nodal_values.len() != mesh.n_vertices() {
        return Err(Error::invalid("need one nodal value per vertex"));
    }
    let m = mesh.element_measure(element);
    if !(m > DEGENERACY_TOL) {
        return Err(Error::SingularGeometry {
            element,
            measure: m,
        });
    }
    let vs = mesh.element(element);
    let hats = mesh.hat_gradients(element);
    let mut g = [0.0, 0.0];
    for (k, &v) in vs.iter().enumerate() {
        g[0] += nodal_values[v] * hats[k][0];
        g[1] += nodal_values[v] * hats[k][1];
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// JSON export/import (schema documented in docs/formats.md)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct MeshJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub elements: Vec<Vec<usize>>,
    pub boundary: Vec<BoundaryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub vertices: Vec<usize>,
    pub marker: i64,
}

impl SpatialMesh {
    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v[..self.dim].to_vec())
                .collect(),
            elements: (0..self.n_elements())
                .map(|e| self.element(e).to_vec())
                .collect(),
            boundary: self
                .boundary_facets
                .iter()
                .map(|f| BoundaryJson {
                    vertices: if self.dim == 1 {
                        vec![f.vertices[0]]
                    } else {
                        f.vertices.to_vec()
                    },
                    marker: f.marker,
                })
                .collect(),
        }
    }

    pub fn from_json(data: &MeshJson) -> Result<Self> {
        let vertices = data
            .vertices
            .iter()
            .map(|v| match v.len() {
                1 => Ok([v[0], 0.0]),
                2 => Ok([v[0], v[1]]),
                n => Err(Error::invalid(format!("vertex with {n} coordinates"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mesh = SpatialMesh::from_cells(data.dim, vertices, data.elements.clone())?;
        for b in &data.boundary {
            let key = match b.vertices.len() {
                1 => [b.vertices[0], b.vertices[0]],
                2 => sorted2(b.vertices[0], b.vertices[1]),
                n => return Err(Error::invalid(format!("boundary facet with {n} vertices"))),
            };
            match mesh
                .boundary_facets
                .iter_mut()
                .find(|f| f.vertices == key)
            {
                Some(f) => f.marker = b.marker,
                None => {
                    return Err(Error::invalid(format!(
                        "boundary marker references non-boundary facet {key:?}"
                    )))
                }
            }
        }
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_interval_partition() {
        let mesh = build_interval_mesh(0.0, 1.0, 4, 1.0).unwrap();
        assert_eq!(mesh.n_elements(), 4);
        for e in 0..4 {
            assert!((mesh.element_measure(e) - 0.25).abs() < 1e-15);
        }
        assert_eq!(mesh.interior_facets().len(), 3);
        assert_eq!(mesh.boundary_facets().len(), 2);
    }

    #[test]
    fn single_element_interval() {
        let mesh = build_interval_mesh(0.0, 1.0, 1, 1.0).unwrap();
        assert_eq!(mesh.n_elements(), 1);
        assert!((mesh.element_measure(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn graded_interval_lengths_follow_geometric_series() {
        // ratio 1/2, three elements summing to 1: lengths 4/7, 2/7, 1/7
        let mesh = build_interval_mesh(0.0, 1.0, 3, 0.5).unwrap();
        let expect = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (e, want) in expect.iter().enumerate() {
            assert!((mesh.element_measure(e) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn interval_rejects_bad_arguments() {
        assert!(build_interval_mesh(0.0, 1.0, 0, 1.0).is_err());
        assert!(build_interval_mesh(0.0, 1.0, 3, 0.0).is_err());
        assert!(build_interval_mesh(1.0, 0.0, 3, 1.0).is_err());
    }

    #[test]
    fn structured_mesh_counts() {
        let pi = std::f64::consts::PI;
        let mesh = build_structured_triangle_mesh(pi, pi, 1, 1).unwrap();
        assert_eq!(mesh.n_elements(), 2);
        assert_eq!(mesh.n_vertices(), 4);

        let mesh = build_structured_triangle_mesh(pi, pi, 4, 4).unwrap();
        assert_eq!(mesh.n_elements(), 32);
        assert_eq!(mesh.n_vertices(), 25);
        assert!(build_structured_triangle_mesh(pi, pi, 0, 4).is_err());
    }

    #[test]
    fn structured_mesh_total_area_matches_shoelace() {
        let pi = std::f64::consts::PI;
        let mesh = build_structured_triangle_mesh(pi, pi, 4, 4).unwrap();
        // independent shoelace sum over elements
        let mut area = 0.0;
        for e in 0..mesh.n_elements() {
            let vs = mesh.element(e);
            let p: Vec<[f64; 2]> = vs.iter().map(|&v| mesh.vertex(v)).collect();
            area += 0.5
                * ((p[0][0] * p[1][1] - p[1][0] * p[0][1])
                    + (p[1][0] * p[2][1] - p[2][0] * p[1][1])
                    + (p[2][0] * p[0][1] - p[0][0] * p[2][1]))
                    .abs();
        }
        assert!((area - pi * pi).abs() < 1e-12 * pi * pi);
        assert!((mesh.domain_measure() - pi * pi).abs() < 1e-12 * pi * pi);
    }

    #[test]
    fn facet_incidence_counts() {
        let mesh = build_structured_triangle_mesh(1.0, 1.0, 3, 3).unwrap();
        // Euler-style count: 2*nx*ny interior diagonals + edges between cells
        for f in mesh.interior_facets() {
            assert_ne!(f.elem_plus, f.elem_minus);
            let n = f.normal;
            assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-14);
        }
        assert_eq!(mesh.boundary_facets().len(), 12);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let mesh = build_structured_triangle_mesh(2.0, 1.0, 3, 2).unwrap();
        let vals = vec![7.5; mesh.n_vertices()];
        for e in 0..mesh.n_elements() {
            let g = element_gradient_of_nodal(&mesh, &vals, e).unwrap();
            assert!(g[0].abs() < 1e-13 && g[1].abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_1d_slope() {
        let mesh = build_interval_mesh(0.0, 0.5, 1, 1.0).unwrap();
        let g = element_gradient_of_nodal(&mesh, &[0.0, 1.0], 0).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_unit_right_triangle() {
        // vertices (0,0),(1,0),(0,1) with values (0,1,2); oracle solves the
        // 2x2 affine system: g . (1,0) = 1, g . (0,1) = 2
        let mesh = SpatialMesh::from_cells(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let g = element_gradient_of_nodal(&mesh, &[0.0, 1.0, 2.0], 0).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
        assert!((g[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_reproduces_affine_functions() {
        let mesh = build_structured_triangle_mesh(3.0, 2.0, 5, 4).unwrap();
        let (a, b, c) = (0.3, -1.7, 0.9);
        let vals: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| {
                let p = mesh.vertex(v);
                a * p[0] + b * p[1] + c
            })
            .collect();
        for e in 0..mesh.n_elements() {
            let g = element_gradient_of_nodal(&mesh, &vals, e).unwrap();
            assert!((g[0] - a).abs() < 1e-12);
            assert!((g[1] - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adjacency_round_trip() {
        let mesh = build_structured_triangle_mesh(1.0, 1.0, 4, 3).unwrap();
        for e in 0..mesh.n_elements() {
            for &v in mesh.element(e) {
                assert!(mesh.vertex_to_elements(v).contains(&e));
            }
        }
        for v in 0..mesh.n_vertices() {
            for &w in mesh.vertex_to_vertices(v) {
                assert!(mesh.vertex_to_vertices(w).contains(&v));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mesh = build_structured_triangle_mesh(1.0, 2.0, 2, 2).unwrap();
        let json = serde_json::to_string(&mesh.to_json()).unwrap();
        let back = SpatialMesh::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.n_elements(), mesh.n_elements());
        assert_eq!(back.n_vertices(), mesh.n_vertices());
        assert!((back.domain_measure() - mesh.domain_measure()).abs() < 1e-14);

        let mesh1 = build_interval_mesh(-1.0, 1.0, 3, 0.8).unwrap();
        let json1 = serde_json::to_string(&mesh1.to_json()).unwrap();
        let back1 = SpatialMesh::from_json(&serde_json::from_str(&json1).unwrap()).unwrap();
        assert_eq!(back1.n_elements(), 3);
    }
}
