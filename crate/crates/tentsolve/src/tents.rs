//! Advancing-front tent pitching and dependency layering.
//!
//! A tent is pitched by moving one vertex forward in time while its
//! neighbours stay fixed, keeping the front sub-characteristic on every
//! element: |grad tau| <= sigma / c. The admissible advance of a vertex is
//! the edge rule k_t = (sigma / kappa) min over adjacent edges of |e| / c,
//! where kappa is the mesh angle factor. Advancing the minimal vertex by at
//! most k_t keeps every edge slope below sigma / (kappa c), and a pair of
//! edge slopes controls the element gradient up to the factor kappa, which
//! yields the elementwise bound. The advance is independent of the current
//! front, so pitching can never stall on saturated constraints.
//!
//! Vertices are picked greedily: always the globally minimal front time,
//! ties broken by lowest vertex index. This keeps slabs deterministic.

use crate::error::{Error, Result};
use crate::mesh::SpatialMesh;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

/// Per-vertex front times during pitching.
#[derive(Debug, Clone)]
pub struct AdvancingFront {
    times: Vec<f64>,
}

impl AdvancingFront {
    pub fn flat(n_vertices: usize, time: f64) -> Self {
        AdvancingFront {
            times: vec![time; n_vertices],
        }
    }

    pub fn time(&self, v: usize) -> f64 {
        self.times[v]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// One tent: the spacetime region between two fronts differing at a single
/// vertex. Stores everything a solver needs to reconstruct both fronts on
/// the vertex patch.
#[derive(Debug, Clone)]
pub struct Tent {
    pub center_vertex: usize,
    pub t_bottom: f64,
    pub t_top: f64,
    /// Times of the patch perimeter vertices, fixed during this tent.
    pub neighbor_times: Vec<(usize, f64)>,
    pub patch_elements: Vec<usize>,
    /// Dependency layer; tents of equal level have element-disjoint patches.
    pub level: usize,
}

impl Tent {
    pub fn height(&self) -> f64 {
        self.t_top - self.t_bottom
    }

    fn neighbor_time(&self, v: usize) -> Option<f64> {
        self.neighbor_times
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, t)| *t)
    }

    /// Vertex time on the bottom (respectively top) front for any vertex of
    /// the patch.
    pub fn front_time(&self, v: usize, top: bool) -> Option<f64> {
        if v == self.center_vertex {
            Some(if top { self.t_top } else { self.t_bottom })
        } else {
            self.neighbor_time(v)
        }
    }
}

/// Affine front data of one tent restricted to one patch element.
#[derive(Debug, Clone)]
pub struct TentPhi {
    /// Bottom-front times at the element vertices.
    pub phi_bottom: Vec<f64>,
    /// Top-front times at the element vertices.
    pub phi_top: Vec<f64>,
    pub grad_phi_bottom: [f64; 2],
    pub grad_phi_top: [f64; 2],
    pub grad_delta: [f64; 2],
    /// delta = phi_top - phi_bottom at the element vertices; zero except at
    /// the tent's center vertex.
    pub delta: Vec<f64>,
}

impl TentPhi {
    /// grad phi at quasi-time, affine interpolation of the two front slopes.
    pub fn grad_phi_at(&self, quasi_time: f64) -> [f64; 2] {
        [
            (1.0 - quasi_time) * self.grad_phi_bottom[0] + quasi_time * self.grad_phi_top[0],
            (1.0 - quasi_time) * self.grad_phi_bottom[1] + quasi_time * self.grad_phi_top[1],
        ]
    }
}

/// Ordered tent collection tiling one spacetime slab.
#[derive(Debug, Clone)]
pub struct TentSlab {
    pub mesh: Arc<SpatialMesh>,
    pub slab_start: f64,
    pub slab_end: f64,
    /// Tents in pitch (causal) order.
    pub tents: Vec<Tent>,
    /// Tent indices per dependency layer.
    pub levels: Vec<Vec<usize>>,
}

impl TentSlab {
    pub fn height(&self) -> f64 {
        self.slab_end - self.slab_start
    }

    /// Sum over tents of the integral of the local tent height delta;
    /// tiling requires this to equal |Omega| * slab height. Exact because
    /// delta is the center-vertex hat function scaled by the tent height.
    pub fn delta_integral(&self) -> f64 {
        let dplus1 = (self.mesh.dim() + 1) as f64;
        self.tents
            .iter()
            .map(|t| {
                let patch: f64 = t
                    .patch_elements
                    .iter()
                    .map(|&e| self.mesh.element_measure(e))
                    .sum();
                t.height() * patch / dplus1
            })
            .sum()
    }
}

fn hat_index(mesh: &SpatialMesh, element: usize, vertex: usize) -> Option<usize> {
    mesh.element(element).iter().position(|&v| v == vertex)
}

/// Shape factor relating edge slopes to element gradients: on every element
/// the gradient of an affine front is bounded by kappa times the largest
/// edge slope. Equals 1 in 1D and sqrt(2) for right triangles.
pub fn mesh_angle_factor(mesh: &SpatialMesh) -> f64 {
    if mesh.dim() == 1 {
        return 1.0;
    }
    let mut kappa: f64 = 1.0;
    for e in 0..mesh.n_elements() {
        let vs = mesh.element(e);
        let p: Vec<[f64; 2]> = vs.iter().map(|&v| mesh.vertex(v)).collect();
        // the gradient is determined by any pair of edges; take the best
        // conditioned pair (edges meeting closest to a right angle)
        let mut best = f64::INFINITY;
        for shared in 0..3 {
            let a = p[(shared + 1) % 3];
            let b = p[(shared + 2) % 3];
            let o = p[shared];
            let u = [a[0] - o[0], a[1] - o[1]];
            let v = [b[0] - o[0], b[1] - o[1]];
            let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let cos = ((u[0] * v[0] + u[1] * v[1]) / (nu * nv)).abs();
            let c_pair = (2.0 / (1.0 - cos).max(1e-12)).sqrt();
            best = best.min(c_pair);
        }
        kappa = kappa.max(best);
    }
    kappa
}

/// Per-vertex advance limit k_t = (sigma / kappa) min over adjacent edges of
/// |e| / c_e, with c_e the largest wavespeed of the elements sharing the
/// edge. Front-independent, so it is computed once per slab.
pub fn vertex_advance_limits(mesh: &SpatialMesh, wavespeed: &[f64], sigma: f64) -> Vec<f64> {
    let kappa = mesh_angle_factor(mesh);
    let scale = sigma / kappa;
    let mut limits = vec![f64::INFINITY; mesh.n_vertices()];
    match mesh.dim() {
        1 => {
            for e in 0..mesh.n_elements() {
                let vs = mesh.element(e);
                let len = mesh.element_measure(e);
                let k = scale * len / wavespeed[e];
                limits[vs[0]] = limits[vs[0]].min(k);
                limits[vs[1]] = limits[vs[1]].min(k);
            }
        }
        _ => {
            let mut edge = |a: usize, b: usize, c: f64| {
                let pa = mesh.vertex(a);
                let pb = mesh.vertex(b);
                let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                let k = scale * len / c;
                limits[a] = limits[a].min(k);
                limits[b] = limits[b].min(k);
            };
            for f in mesh.interior_facets() {
                let c = wavespeed[f.elem_plus].max(wavespeed[f.elem_minus]);
                edge(f.vertices[0], f.vertices[1], c);
            }
            for f in mesh.boundary_facets() {
                edge(f.vertices[0], f.vertices[1], wavespeed[f.element]);
            }
        }
    }
    limits
}

/// Result of attempting to pitch one vertex.
#[derive(Debug)]
pub enum PitchOutcome {
    Pitched(Tent),
    /// Vertex already at the slab top.
    AtSlabTop,
    /// The advance limit is numerically zero (degenerate geometry or an
    /// extreme wavespeed); pitching cannot make progress at this vertex.
    Stuck,
}

impl PitchOutcome {
    pub fn tent(self) -> Option<Tent> {
        match self {
            PitchOutcome::Pitched(t) => Some(t),
            _ => None,
        }
    }
}

/// Pitch a single tent at `vertex`, advancing the front in place.
/// `advance_limits` is the per-vertex k_t from [`vertex_advance_limits`];
/// the caller must pitch vertices in a causal order (minimal first) for the
/// slope bound to hold.
pub fn pitch_single_tent(
    mesh: &SpatialMesh,
    front: &mut AdvancingFront,
    vertex: usize,
    slab_end: f64,
    advance_limits: &[f64],
) -> PitchOutcome {
    let t_bottom = front.times[vertex];
    if t_bottom >= slab_end {
        return PitchOutcome::AtSlabTop;
    }
    let t_top = (t_bottom + advance_limits[vertex]).min(slab_end);
    let stuck_tol = 1e-13 * (slab_end - t_bottom).max(1.0);
    if t_top < slab_end && t_top - t_bottom <= stuck_tol {
        return PitchOutcome::Stuck;
    }
    let neighbor_times = mesh
        .vertex_to_vertices(vertex)
        .iter()
        .map(|&w| (w, front.times[w]))
        .collect();
    front.times[vertex] = t_top;
    PitchOutcome::Pitched(Tent {
        center_vertex: vertex,
        t_bottom,
        t_top,
        neighbor_times,
        patch_elements: mesh.vertex_patch(vertex).to_vec(),
        level: usize::MAX,
    })
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    time: f64,
    vertex: usize,
}

// min-heap on (time, vertex)
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .unwrap()
            .then(other.vertex.cmp(&self.vertex))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.vertex == other.vertex
    }
}
impl Eq for HeapEntry {}

/// Pitch tents until every vertex reaches `slab_start + slab_height`.
///
/// `wavespeed` is per element; `sigma` in (0,1) is the causality safety
/// factor, so fronts satisfy |grad tau| <= sigma / c elementwise.
pub fn pitch_slab(
    mesh: Arc<SpatialMesh>,
    wavespeed: &[f64],
    slab_start: f64,
    slab_height: f64,
    sigma: f64,
) -> Result<TentSlab> {
    if wavespeed.len() != mesh.n_elements() {
        return Err(Error::invalid("need one wavespeed per element"));
    }
    if wavespeed.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::invalid("wavespeeds must be positive"));
    }
    if !(0.0 < sigma && sigma < 1.0) {
        return Err(Error::invalid(format!("sigma {sigma} outside (0,1)")));
    }
    if slab_height < 0.0 {
        return Err(Error::invalid(format!(
            "negative slab height {slab_height}"
        )));
    }
    let slab_end = slab_start + slab_height;
    let mut slab = TentSlab {
        mesh: mesh.clone(),
        slab_start,
        slab_end,
        tents: Vec::new(),
        levels: Vec::new(),
    };
    if slab_height == 0.0 {
        return Ok(slab);
    }
    let limits = vertex_advance_limits(&mesh, wavespeed, sigma);
    let mut front = AdvancingFront::flat(mesh.n_vertices(), slab_start);
    let mut heap = BinaryHeap::with_capacity(mesh.n_vertices());
    for v in 0..mesh.n_vertices() {
        heap.push(HeapEntry {
            time: slab_start,
            vertex: v,
        });
    }
    while let Some(HeapEntry { time, vertex }) = heap.pop() {
        if front.times[vertex] != time {
            continue; // stale entry
        }
        match pitch_single_tent(&mesh, &mut front, vertex, slab_end, &limits) {
            PitchOutcome::Pitched(tent) => {
                let t_top = tent.t_top;
                slab.tents.push(tent);
                if t_top < slab_end {
                    heap.push(HeapEntry {
                        time: t_top,
                        vertex,
                    });
                }
            }
            PitchOutcome::AtSlabTop => {}
            PitchOutcome::Stuck => {
                return Err(Error::PitchingStuck {
                    vertex,
                    time: front.times[vertex],
                })
            }
        }
    }
    debug_assert!(front.times.iter().all(|&t| t == slab_end));
    Ok(slab)
}

/// Assign dependency layers by a greedy scan in pitch order: each tent goes
/// one past the highest layer of any earlier tent centered at its own center
/// or a neighbouring vertex. Same-layer tents have element-disjoint patches.
pub fn assign_levels(slab: &mut TentSlab) {
    let mesh = slab.mesh.clone();
    let mut last_level: Vec<Option<usize>> = vec![None; mesh.n_vertices()];
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (i, tent) in slab.tents.iter_mut().enumerate() {
        let v = tent.center_vertex;
        let mut level = 0;
        if let Some(l) = last_level[v] {
            level = level.max(l + 1);
        }
        for &w in mesh.vertex_to_vertices(v) {
            if let Some(l) = last_level[w] {
                level = level.max(l + 1);
            }
        }
        tent.level = level;
        last_level[v] = Some(level);
        if levels.len() <= level {
            levels.resize_with(level + 1, Vec::new);
        }
        levels[level].push(i);
    }
    slab.levels = levels;
}

/// Front data of one tent restricted to `element`.
pub fn tent_phi(mesh: &SpatialMesh, tent: &Tent, element: usize) -> Result<TentPhi> {
    if !tent.patch_elements.contains(&element) {
        return Err(Error::invalid(format!(
            "element {element} not in patch of tent at vertex {}",
            tent.center_vertex
        )));
    }
    let vs = mesh.element(element);
    let hats = mesh.hat_gradients(element);
    let local_center =
        hat_index(mesh, element, tent.center_vertex).expect("patch element contains center");
    let mut phi_bottom = Vec::with_capacity(vs.len());
    let mut phi_top = Vec::with_capacity(vs.len());
    let mut delta = Vec::with_capacity(vs.len());
    for (k, &v) in vs.iter().enumerate() {
        let t = tent
            .front_time(v, false)
            .ok_or_else(|| Error::invalid(format!("vertex {v} missing from tent data")))?;
        phi_bottom.push(t);
        if k == local_center {
            phi_top.push(tent.t_top);
            delta.push(tent.height());
        } else {
            phi_top.push(t);
            delta.push(0.0);
        }
    }
    let mut gb = [0.0_f64; 2];
    let mut gt = [0.0_f64; 2];
    for k in 0..vs.len() {
        gb[0] += phi_bottom[k] * hats[k][0];
        gb[1] += phi_bottom[k] * hats[k][1];
        gt[0] += phi_top[k] * hats[k][0];
        gt[1] += phi_top[k] * hats[k][1];
    }
    let gd = [
        tent.height() * hats[local_center][0],
        tent.height() * hats[local_center][1],
    ];
    Ok(TentPhi {
        phi_bottom,
        phi_top,
        grad_phi_bottom: gb,
        grad_phi_top: gt,
        grad_delta: gd,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Slab statistics and JSON export
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlabStats {
    pub tent_count: usize,
    pub min_height: f64,
    pub max_height: f64,
    pub mean_height: f64,
    pub layer_count: usize,
    /// Tents per layer, the parallelism profile.
    pub layer_widths: Vec<usize>,
    pub max_layer_width: usize,
    pub tiling_relative_error: f64,
}

impl TentSlab {
    pub fn stats(&self) -> SlabStats {
        let heights: Vec<f64> = self.tents.iter().map(Tent::height).collect();
        let tent_count = heights.len();
        let sum: f64 = heights.iter().sum();
        let widths: Vec<usize> = self.levels.iter().map(Vec::len).collect();
        let expected = self.mesh.domain_measure() * self.height();
        let tiling_relative_error = if expected > 0.0 {
            (self.delta_integral() - expected).abs() / expected
        } else {
            0.0
        };
        SlabStats {
            tent_count,
            min_height: heights.iter().copied().fold(f64::INFINITY, f64::min),
            max_height: heights.iter().copied().fold(0.0, f64::max),
            mean_height: if tent_count > 0 {
                sum / tent_count as f64
            } else {
                0.0
            },
            layer_count: widths.len(),
            max_layer_width: widths.iter().copied().max().unwrap_or(0),
            layer_widths: widths,
            tiling_relative_error,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TentJson {
    pub center_vertex: usize,
    pub t_bottom: f64,
    pub t_top: f64,
    pub neighbor_times: Vec<(usize, f64)>,
    pub patch_elements: Vec<usize>,
    pub level: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SlabJson {
    pub slab_start: f64,
    pub slab_end: f64,
    pub tents: Vec<TentJson>,
    pub levels: Vec<Vec<usize>>,
}

impl TentSlab {
    pub fn to_json(&self) -> SlabJson {
        SlabJson {
            slab_start: self.slab_start,
            slab_end: self.slab_end,
            tents: self
                .tents
                .iter()
                .map(|t| TentJson {
                    center_vertex: t.center_vertex,
                    t_bottom: t.t_bottom,
                    t_top: t.t_top,
                    neighbor_times: t.neighbor_times.clone(),
                    patch_elements: t.patch_elements.clone(),
                    level: t.level,
                })
                .collect(),
            levels: self.levels.clone(),
        }
    }
}

/// Replay the slab front by front and report the worst causality violation
/// (max over elements of |grad tau| * c - sigma) and whether vertex times
/// ever decreased. Used by tests and run diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlabCheck {
    pub max_slope_excess: f64,
    pub monotone: bool,
    pub reaches_slab_end: bool,
}

pub fn check_slab(slab: &TentSlab, wavespeed: &[f64], sigma: f64) -> SlabCheck {
    let mesh = &slab.mesh;
    let mut front = vec![slab.slab_start; mesh.n_vertices()];
    let mut monotone = true;
    let mut max_excess = f64::NEG_INFINITY;
    let slope_on = |times: &[f64], e: usize| -> f64 {
        let hats = mesh.hat_gradients(e);
        let vs = mesh.element(e);
        let mut g = [0.0_f64; 2];
        for (k, &v) in vs.iter().enumerate() {
            g[0] += times[v] * hats[k][0];
            g[1] += times[v] * hats[k][1];
        }
        (g[0] * g[0] + g[1] * g[1]).sqrt()
    };
    for e in 0..mesh.n_elements() {
        max_excess = max_excess.max(slope_on(&front, e) * wavespeed[e] - sigma);
    }
    for tent in &slab.tents {
        if tent.t_top < front[tent.center_vertex] {
            monotone = false;
        }
        front[tent.center_vertex] = tent.t_top;
        for &e in &tent.patch_elements {
            max_excess = max_excess.max(slope_on(&front, e) * wavespeed[e] - sigma);
        }
    }
    SlabCheck {
        max_slope_excess: max_excess,
        monotone,
        reaches_slab_end: front.iter().all(|&t| t == slab.slab_end),
    }
}
