//! Modal DG space for the three-field vector (E_z, H_x, H_y).
//!
//! The basis is orthonormal on the reference simplex, so on affine elements
//! the scalar mass matrix is |det J| times the identity. The space
//! pre-tabulates everything the per-tent operators need: basis values and
//! reference gradients at volume quadrature points, traces at facet
//! quadrature points, and the reference moment tensor
//! R[v][e][j][i] = int lambda_v psi_j d_e psi_i used to build delta-weighted
//! stiffness contributions without per-tent quadrature.

use crate::basis::ModalBasis;
use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, SpatialMesh};
use crate::quad::{interval_rule, triangle_rule, QuadRule};
use std::sync::Arc;

pub const N_FIELDS: usize = 3;
pub const EZ: usize = 0;
pub const HX: usize = 1;
pub const HY: usize = 2;

/// Unified facet view with tabulated basis traces. `elem_minus = None`
/// marks a domain boundary facet; the normal then points out of the domain.
#[derive(Debug, Clone)]
pub struct FacetData {
    pub vertices: [usize; 2],
    pub elem_plus: usize,
    pub elem_minus: Option<usize>,
    /// Unit normal pointing out of `elem_plus`.
    pub normal: [f64; 2],
    /// Physical quadrature weights (facet measure included).
    pub weights: Vec<f64>,
    /// Basis traces from the plus / minus side: `[k][q]`.
    pub trace_plus: Vec<Vec<f64>>,
    pub trace_minus: Vec<Vec<f64>>,
    /// Hat-function values of the two facet endpoints at the quadrature
    /// points (affine along the facet).
    pub hat_end: [Vec<f64>; 2],
}

#[derive(Debug, Clone)]
pub struct DGSpace {
    pub mesh: Arc<SpatialMesh>,
    pub degree: usize,
    basis: ModalBasis,
    vol_rule: QuadRule,
    /// Basis values at volume quadrature points `[k][q]` (element-independent).
    psi: Vec<Vec<f64>>,
    /// Reference gradients at volume quadrature points `[k][q]`.
    dpsi: Vec<Vec<[f64; 2]>>,
    /// Reference hat values at volume points `[local_vertex][q]`.
    hat_vol: Vec<Vec<f64>>,
    /// Moment tensor, flattened as `((v * 2 + e) * ndof + j) * ndof + i`.
    rmom: Vec<f64>,
    geoms: Vec<ElementGeometry>,
    facets: Vec<FacetData>,
    /// Facets incident to each vertex (those carrying nonzero tent height).
    vertex_facets: Vec<Vec<usize>>,
}

impl DGSpace {
    pub fn new(mesh: Arc<SpatialMesh>, degree: usize) -> Self {
        let dim = mesh.dim();
        let basis = ModalBasis::new(dim, degree);
        let ndof = basis.ndof();
        let vol_rule = match dim {
            1 => interval_rule(2 * degree + 2),
            _ => triangle_rule(2 * degree + 2),
        };
        let psi = basis.tabulate_values(&vol_rule.points);
        let dpsi = basis.tabulate_gradients(&vol_rule.points);
        let n_hats = dim + 1;
        let mut hat_vol = vec![Vec::with_capacity(vol_rule.len()); n_hats];
        for &p in &vol_rule.points {
            let hats = match dim {
                1 => vec![1.0 - p[0], p[0]],
                _ => vec![1.0 - p[0] - p[1], p[0], p[1]],
            };
            for (v, h) in hats.into_iter().enumerate() {
                hat_vol[v].push(h);
            }
        }
        // reference moments R[v][e][j][i]
        let mut rmom = vec![0.0; n_hats * 2 * ndof * ndof];
        for v in 0..n_hats {
            for e in 0..dim {
                for j in 0..ndof {
                    for i in 0..ndof {
                        let s: f64 = (0..vol_rule.len())
                            .map(|q| vol_rule.weights[q] * hat_vol[v][q] * psi[j][q] * dpsi[i][q][e])
                            .sum();
                        rmom[((v * 2 + e) * ndof + j) * ndof + i] = s;
                    }
                }
            }
        }
        let geoms: Vec<ElementGeometry> = (0..mesh.n_elements()).map(|e| mesh.geometry(e)).collect();
        let facets = build_facets(&mesh, &basis, degree);
        let mut vertex_facets = vec![Vec::new(); mesh.n_vertices()];
        for (fi, f) in facets.iter().enumerate() {
            vertex_facets[f.vertices[0]].push(fi);
            if f.vertices[1] != f.vertices[0] {
                vertex_facets[f.vertices[1]].push(fi);
            }
        }
        DGSpace {
            mesh,
            degree,
            basis,
            vol_rule,
            psi,
            dpsi,
            hat_vol,
            rmom,
            geoms,
            facets,
            vertex_facets,
        }
    }

    pub fn ndof_scalar(&self) -> usize {
        self.basis.ndof()
    }

    pub fn n_dofs(&self) -> usize {
        N_FIELDS * self.basis.ndof() * self.mesh.n_elements()
    }

    /// Offset of the (element, component) coefficient block.
    pub fn offset(&self, element: usize, component: usize) -> usize {
        (element * N_FIELDS + component) * self.basis.ndof()
    }

    pub fn element_block(&self, element: usize) -> std::ops::Range<usize> {
        let b = N_FIELDS * self.basis.ndof();
        element * b..(element + 1) * b
    }

    pub fn geometry(&self, element: usize) -> &ElementGeometry {
        &self.geoms[element]
    }

    pub fn facets(&self) -> &[FacetData] {
        &self.facets
    }

    pub fn vertex_facets(&self, v: usize) -> &[usize] {
        &self.vertex_facets[v]
    }

    pub fn vol_rule(&self) -> &QuadRule {
        &self.vol_rule
    }

    pub fn psi(&self) -> &[Vec<f64>] {
        &self.psi
    }

    pub fn dpsi(&self) -> &[Vec<[f64; 2]>] {
        &self.dpsi
    }

    pub fn hat_vol(&self) -> &[Vec<f64>] {
        &self.hat_vol
    }

    pub fn rmoment(&self, v: usize, e: usize, j: usize, i: usize) -> f64 {
        let n = self.basis.ndof();
        self.rmom[((v * 2 + e) * n + j) * n + i]
    }

    pub fn map_to_physical(&self, element: usize, xi: [f64; 2]) -> [f64; 2] {
        let vs = self.mesh.element(element);
        let a = self.mesh.vertex(vs[0]);
        match self.mesh.dim() {
            1 => {
                let b = self.mesh.vertex(vs[1]);
                [a[0] + xi[0] * (b[0] - a[0]), 0.0]
            }
            _ => {
                let b = self.mesh.vertex(vs[1]);
                let c = self.mesh.vertex(vs[2]);
                [
                    a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (c[0] - a[0]),
                    a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (c[1] - a[1]),
                ]
            }
        }
    }

    pub fn basis(&self) -> &ModalBasis {
        &self.basis
    }
}

fn build_facets(mesh: &SpatialMesh, basis: &ModalBasis, degree: usize) -> Vec<FacetData> {
    let ndof = basis.ndof();
    let mut out = Vec::new();
    let line = interval_rule(2 * degree + 2);
    let tabulate_side = |elem: usize, points: &[[f64; 2]]| -> Vec<Vec<f64>> {
        let refs: Vec<[f64; 2]> = points.iter().map(|&x| mesh.to_reference(elem, x)).collect();
        (0..ndof)
            .map(|k| refs.iter().map(|&xi| basis.value(k, xi)).collect())
            .collect()
    };
    let push = |vertices: [usize; 2],
                    elem_plus: usize,
                    elem_minus: Option<usize>,
                    normal: [f64; 2],
                    out: &mut Vec<FacetData>| {
        match mesh.dim() {
            1 => {
                let x = mesh.vertex(vertices[0]);
                let points = vec![x];
                let trace_plus = tabulate_side(elem_plus, &points);
                let trace_minus = elem_minus
                    .map(|em| tabulate_side(em, &points))
                    .unwrap_or_default();
                out.push(FacetData {
                    vertices,
                    elem_plus,
                    elem_minus,
                    normal,
                    weights: vec![1.0],
                    trace_plus,
                    trace_minus,
                    hat_end: [vec![1.0], vec![1.0]],
                });
            }
            _ => {
                let a = mesh.vertex(vertices[0]);
                let b = mesh.vertex(vertices[1]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let mut points = Vec::with_capacity(line.len());
                let mut weights = Vec::with_capacity(line.len());
                let mut hat0 = Vec::with_capacity(line.len());
                let mut hat1 = Vec::with_capacity(line.len());
                for (q, &w) in line.weights.iter().enumerate() {
                    let s = line.points[q][0];
                    points.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                    weights.push(w * len);
                    hat0.push(1.0 - s);
                    hat1.push(s);
                }
                let trace_plus = tabulate_side(elem_plus, &points);
                let trace_minus = elem_minus
                    .map(|em| tabulate_side(em, &points))
                    .unwrap_or_default();
                out.push(FacetData {
                    vertices,
                    elem_plus,
                    elem_minus,
                    normal,
                    weights,
                    trace_plus,
                    trace_minus,
                    hat_end: [hat0, hat1],
                });
            }
        }
    };
    for f in mesh.interior_facets() {
        push(f.vertices, f.elem_plus, Some(f.elem_minus), f.normal, &mut out);
    }
    for f in mesh.boundary_facets() {
        push(f.vertices, f.element, None, f.normal, &mut out);
    }
    out
}

/// Flat coefficient vector over (element, component, mode).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    data: Vec<f64>,
}

impl FieldVector {
    pub fn zeros(space: &DGSpace) -> Self {
        FieldVector {
            data: vec![0.0; space.n_dofs()],
        }
    }

    pub fn from_data(space: &DGSpace, data: Vec<f64>) -> Result<Self> {
        if data.len() != space.n_dofs() {
            return Err(Error::invalid(format!(
                "coefficient vector length {} does not match space dof count {}",
                data.len(),
                space.n_dofs()
            )));
        }
        Ok(FieldVector { data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Elementwise L2 projection of a field at time `t` onto the DG space.
pub fn project<F>(space: &DGSpace, f: F, t: f64) -> FieldVector
where
    F: Fn([f64; 2], f64) -> [f64; N_FIELDS],
{
    let ndof = space.ndof_scalar();
    let rule = space.vol_rule();
    let mut u = FieldVector::zeros(space);
    for e in 0..space.mesh.n_elements() {
        for (q, &w) in rule.weights.iter().enumerate() {
            let x = space.map_to_physical(e, rule.points[q]);
            let vals = f(x, t);
            for c in 0..N_FIELDS {
                let off = space.offset(e, c);
                for k in 0..ndof {
                    // orthonormal reference basis: mass = jdet * I, and the
                    // rhs carries the same jdet, so it cancels
                    u.data[off + k] += w * vals[c] * space.psi()[k][q];
                }
            }
        }
    }
    u
}

/// Spatial L2 error over all field components at time `t`.
pub fn l2_error<F>(space: &DGSpace, u: &FieldVector, exact: F, t: f64) -> f64
where
    F: Fn([f64; 2], f64) -> [f64; N_FIELDS],
{
    let ndof = space.ndof_scalar();
    let rule = space.vol_rule();
    let mut total = 0.0;
    for e in 0..space.mesh.n_elements() {
        let jdet = space.geometry(e).jdet;
        for (q, &w) in rule.weights.iter().enumerate() {
            let x = space.map_to_physical(e, rule.points[q]);
            let vals = exact(x, t);
            for c in 0..N_FIELDS {
                let off = space.offset(e, c);
                let mut uh = 0.0;
                for k in 0..ndof {
                    uh += u.data[off + k] * space.psi()[k][q];
                }
                total += w * jdet * (uh - vals[c]) * (uh - vals[c]);
            }
        }
    }
    total.sqrt()
}

/// Discrete field energy sum over elements of int eps Ez^2 + mu |H|^2, exact
/// for the modal basis.
pub fn field_energy(space: &DGSpace, u: &FieldVector, eps: &[f64], mu: &[f64]) -> f64 {
    let ndof = space.ndof_scalar();
    let mut total = 0.0;
    for e in 0..space.mesh.n_elements() {
        let jdet = space.geometry(e).jdet;
        let mut comp = [0.0; N_FIELDS];
        for (c, acc) in comp.iter_mut().enumerate() {
            let off = space.offset(e, c);
            *acc = u.data[off..off + ndof].iter().map(|v| v * v).sum();
        }
        total += jdet * (eps[e] * comp[EZ] + mu[e] * (comp[HX] + comp[HY]));
    }
    total
}

/// Evaluate the discrete solution at a physical point; scans elements and
/// uses barycentric containment with a small tolerance.
pub fn eval_at_point(space: &DGSpace, u: &FieldVector, x: [f64; 2]) -> Option<[f64; N_FIELDS]> {
    let tol = 1e-12;
    let mesh = &space.mesh;
    for e in 0..mesh.n_elements() {
        let xi = mesh.to_reference(e, x);
        let inside = match mesh.dim() {
            1 => xi[0] >= -tol && xi[0] <= 1.0 + tol,
            _ => xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol,
        };
        if inside {
            let ndof = space.ndof_scalar();
            let mut out = [0.0; N_FIELDS];
            for (c, val) in out.iter_mut().enumerate() {
                let off = space.offset(e, c);
                for k in 0..ndof {
                    *val += u.data[off + k] * space.basis().value(k, xi);
                }
            }
            return Some(out);
        }
    }
    None
}
