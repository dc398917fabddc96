//! MTP spatial discretization of the 2D TM Maxwell system.
//!
//! On the tent cylinder the fields u = (E_z, H_x, H_y) satisfy
//! d/dt [ (g(u) - f(u) grad phi) ] + div(delta f(u)) = 0, where g scales by
//! the material parameters and f is the TM flux
//!
//!   f(u) = [ -H_y  H_x ]
//!          [   0   E_z ]
//!          [ -E_z   0  ].
//!
//! The pointwise factor of the mass term is the symmetric coupling matrix
//! C(grad phi); since fronts are piecewise affine, C is constant per element
//! and the tent mass operator factors as C(t) (x) (scalar mass), with C
//! affine in quasi-time. The stiffness-like operator A is applied
//! matrix-free from precomputed delta-weighted moments plus upwind facet
//! fluxes; facets on the patch boundary carry delta = 0 and are skipped,
//! making their contribution exactly zero.

use crate::dg::{DGSpace, FieldVector, EZ, HX, HY, N_FIELDS};
use crate::error::{Error, Result};
use crate::stepper::TentOperators;
use crate::tents::{tent_phi, Tent};

pub type Mat3 = [[f64; 3]; 3];

/// Pointwise coupling matrix of the tent mass term, rows/columns ordered
/// (E_z, H_x, H_y):
///
///   C = [ eps   -phi_y  phi_x ]
///       [ -phi_y  mu      0   ]
///       [ phi_x   0       mu  ].
pub fn pointwise_coupling_matrix(gradphi: [f64; 2], eps: f64, mu: f64) -> Mat3 {
    let [px, py] = gradphi;
    [[eps, -py, px], [-py, mu, 0.0], [px, 0.0, mu]]
}

/// Quasi-time derivative of the coupling matrix, built from grad delta.
pub fn coupling_matrix_derivative(grad_delta: [f64; 2]) -> Mat3 {
    let [dx, dy] = grad_delta;
    [[0.0, -dy, dx], [-dy, 0.0, 0.0], [dx, 0.0, 0.0]]
}

pub fn mat3_det(c: &Mat3) -> f64 {
    c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
        - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
        + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
}

fn mat3_inverse(c: &Mat3, det: f64) -> Mat3 {
    let adj = [
        [
            c[1][1] * c[2][2] - c[1][2] * c[2][1],
            c[0][2] * c[2][1] - c[0][1] * c[2][2],
            c[0][1] * c[1][2] - c[0][2] * c[1][1],
        ],
        [
            c[1][2] * c[2][0] - c[1][0] * c[2][2],
            c[0][0] * c[2][2] - c[0][2] * c[2][0],
            c[0][2] * c[1][0] - c[0][0] * c[1][2],
        ],
        [
            c[1][0] * c[2][1] - c[1][1] * c[2][0],
            c[0][1] * c[2][0] - c[0][0] * c[2][1],
            c[0][0] * c[1][1] - c[0][1] * c[1][0],
        ],
    ];
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            inv[r][s] = adj[r][s] / det;
        }
    }
    inv
}

/// Smallest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
pub fn sym3_min_eigenvalue(a: &Mat3) -> f64 {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            b[r][s] = (a[r][s] - if r == s { q } else { 0.0 }) / p;
        }
    }
    let r = (mat3_det(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // eigenvalues are q + 2p cos(phi + 2 pi k / 3); k = 1 is the smallest
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos()
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Closed-form pointwise solve of the 3D tent mass relation
/// eps E - H x grad phi = w_E, mu H + E x grad phi = w_H:
///
///   E = (eps mu - |g|^2)^{-1} (I - g g^T / (eps mu)) (mu w_E + w_H x g),
///   H = (eps mu - |g|^2)^{-1} (I - g g^T / (eps mu)) (eps w_H - w_E x g).
///
/// Requires |grad phi|^2 < eps mu (causality).
pub fn solve_pointwise_maxwell3d(
    w_e: [f64; 3],
    w_h: [f64; 3],
    gradphi: [f64; 3],
    eps: f64,
    mu: f64,
) -> Result<([f64; 3], [f64; 3])> {
    let g = gradphi;
    let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    let denom = eps * mu - g2;
    if !(denom > 0.0) {
        return Err(Error::SingularMass {
            element: 0,
            quasi_time: 0.0,
            det: denom,
        });
    }
    let project = |v: [f64; 3]| -> [f64; 3] {
        let gv = (g[0] * v[0] + g[1] * v[1] + g[2] * v[2]) / (eps * mu);
        [v[0] - g[0] * gv, v[1] - g[1] * gv, v[2] - g[2] * gv]
    };
    let whxg = cross3(w_h, g);
    let wexg = cross3(w_e, g);
    let re = project([
        mu * w_e[0] + whxg[0],
        mu * w_e[1] + whxg[1],
        mu * w_e[2] + whxg[2],
    ]);
    let rh = project([
        eps * w_h[0] - wexg[0],
        eps * w_h[1] - wexg[1],
        eps * w_h[2] - wexg[2],
    ]);
    Ok((
        [re[0] / denom, re[1] / denom, re[2] / denom],
        [rh[0] / denom, rh[1] / denom, rh[2] / denom],
    ))
}

/// Upwind numerical flux of the TM system with adjustable jump penalty.
/// `u_plus` is the trace from the element the normal points out of; jumps
/// are (plus - minus). `penalty = 1` is the plain tangential-jump flux,
/// `penalty = 1/2` the characteristic (exact Riemann) scaling.
pub fn upwind_flux_2d_with_penalty(
    u_plus: [f64; 3],
    u_minus: [f64; 3],
    n: [f64; 2],
    penalty: f64,
) -> [f64; 3] {
    let [nx, ny] = n;
    let mean = |c: usize| 0.5 * (u_plus[c] + u_minus[c]);
    let ez_m = mean(EZ);
    let tau_m = mean(HX) * ny - mean(HY) * nx;
    let hn_p = u_plus[HX] * nx + u_plus[HY] * ny;
    let hn_m = u_minus[HX] * nx + u_minus[HY] * ny;
    let jump_ez = u_plus[EZ] - u_minus[EZ];
    let jump_htx = (u_plus[HX] - hn_p * nx) - (u_minus[HX] - hn_m * nx);
    let jump_hty = (u_plus[HY] - hn_p * ny) - (u_minus[HY] - hn_m * ny);
    [
        tau_m + penalty * jump_ez,
        ez_m * ny + penalty * jump_htx,
        -ez_m * nx + penalty * jump_hty,
    ]
}

/// Upwind flux with the plain unit jump penalty.
pub fn upwind_flux_2d(u_plus: [f64; 3], u_minus: [f64; 3], n: [f64; 2]) -> [f64; 3] {
    upwind_flux_2d_with_penalty(u_plus, u_minus, n, 1.0)
}

/// Physical flux in direction n, f(u) . n.
pub fn physical_flux_normal(u: [f64; 3], n: [f64; 2]) -> [f64; 3] {
    [
        u[HX] * n[1] - u[HY] * n[0],
        u[EZ] * n[1],
        -u[EZ] * n[0],
    ]
}

struct TentElem {
    global: usize,
    jdet: f64,
    eps: f64,
    mu: f64,
    c0: Mat3,
    cprime: Mat3,
    grad_phi_bottom: [f64; 2],
    grad_delta: [f64; 2],
    /// delta-weighted gradient moments int_T delta b_j d_x b_i and d_y,
    /// flattened as j * ndof + i.
    gx: Vec<f64>,
    gy: Vec<f64>,
}

struct TentFacet {
    plus_local: usize,
    /// None marks a domain-boundary facet handled by the PEC mirror state.
    minus_local: Option<usize>,
    normal: [f64; 2],
    /// Quadrature weight times local tent height delta per point.
    wdelta: Vec<f64>,
    /// Traces transposed for contiguous access: q * ndof + k.
    trace_plus: Vec<f64>,
    trace_minus: Vec<f64>,
}

/// Discrete operators of one tent: the affine mass factors C(t) (x) scalar
/// mass, and the matrix-free A. Immutable after assembly; all applies are
/// pure, so distinct tents may be processed concurrently.
pub struct TentSystem<'a> {
    space: &'a DGSpace,
    pub center_vertex: usize,
    flux_penalty: f64,
    elems: Vec<TentElem>,
    facets: Vec<TentFacet>,
}

/// Assemble the tent operators. Materials are per element; `flux_penalty`
/// scales the jump terms of the upwind flux (1 = plain, 1/2 = Riemann).
pub fn assemble_tent_system<'a>(
    space: &'a DGSpace,
    tent: &Tent,
    eps: &[f64],
    mu: &[f64],
    flux_penalty: f64,
) -> Result<TentSystem<'a>> {
    if space.mesh.dim() != 2 {
        return Err(Error::invalid(
            "the TM Maxwell tent system is two-dimensional",
        ));
    }
    let mesh = &space.mesh;
    let ndof = space.ndof_scalar();
    let height = tent.height();
    let mut elems = Vec::with_capacity(tent.patch_elements.len());
    for &e in &tent.patch_elements {
        let phi = tent_phi(mesh, tent, e)?;
        let (ee, me) = (eps[e], mu[e]);
        let cmax = (ee * me).sqrt();
        for g in [phi.grad_phi_bottom, phi.grad_phi_top] {
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if norm >= cmax {
                return Err(Error::SingularMass {
                    element: e,
                    quasi_time: 0.0,
                    det: cmax * cmax - norm * norm,
                });
            }
        }
        let geom = space.geometry(e);
        let vloc = mesh
            .element(e)
            .iter()
            .position(|&v| v == tent.center_vertex)
            .expect("patch element contains the center vertex");
        let mut gx = vec![0.0; ndof * ndof];
        let mut gy = vec![0.0; ndof * ndof];
        let scale = height * geom.jdet;
        for j in 0..ndof {
            for i in 0..ndof {
                let r0 = space.rmoment(vloc, 0, j, i);
                let r1 = space.rmoment(vloc, 1, j, i);
                gx[j * ndof + i] = scale * (geom.jinv_t[0][0] * r0 + geom.jinv_t[0][1] * r1);
                gy[j * ndof + i] = scale * (geom.jinv_t[1][0] * r0 + geom.jinv_t[1][1] * r1);
            }
        }
        elems.push(TentElem {
            global: e,
            jdet: geom.jdet,
            eps: ee,
            mu: me,
            c0: pointwise_coupling_matrix(phi.grad_phi_bottom, ee, me),
            cprime: coupling_matrix_derivative(phi.grad_delta),
            grad_phi_bottom: phi.grad_phi_bottom,
            grad_delta: phi.grad_delta,
            gx,
            gy,
        });
    }
    let local_of = |global: usize| -> Option<usize> {
        elems.iter().position(|el| el.global == global)
    };
    let mut facets = Vec::new();
    for &fi in space.vertex_facets(tent.center_vertex) {
        let fd = &space.facets()[fi];
        let plus_local = local_of(fd.elem_plus)
            .ok_or_else(|| Error::invalid("facet element missing from tent patch"))?;
        let minus_local = match fd.elem_minus {
            Some(em) => Some(
                local_of(em)
                    .ok_or_else(|| Error::invalid("facet element missing from tent patch"))?,
            ),
            None => None,
        };
        let side = if fd.vertices[0] == tent.center_vertex {
            0
        } else {
            1
        };
        let nq = fd.weights.len();
        let wdelta: Vec<f64> = (0..nq)
            .map(|q| fd.weights[q] * height * fd.hat_end[side][q])
            .collect();
        let mut trace_plus = vec![0.0; nq * ndof];
        let mut trace_minus = vec![0.0; if minus_local.is_some() { nq * ndof } else { 0 }];
        for q in 0..nq {
            for k in 0..ndof {
                trace_plus[q * ndof + k] = fd.trace_plus[k][q];
                if minus_local.is_some() {
                    trace_minus[q * ndof + k] = fd.trace_minus[k][q];
                }
            }
        }
        facets.push(TentFacet {
            plus_local,
            minus_local,
            normal: fd.normal,
            wdelta,
            trace_plus,
            trace_minus,
        });
    }
    Ok(TentSystem {
        space,
        center_vertex: tent.center_vertex,
        flux_penalty,
        elems,
        facets,
    })
}

impl TentSystem<'_> {
    pub fn n_patch_elements(&self) -> usize {
        self.elems.len()
    }

    pub fn patch_globals(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems.iter().map(|el| el.global)
    }

    fn ndof(&self) -> usize {
        self.space.ndof_scalar()
    }

    fn local_offset(&self, local_elem: usize, comp: usize) -> usize {
        (local_elem * N_FIELDS + comp) * self.ndof()
    }

    /// Copy the patch coefficients out of the global vector.
    pub fn gather(&self, global: &FieldVector) -> Vec<f64> {
        let block = N_FIELDS * self.ndof();
        let mut local = vec![0.0; self.elems.len() * block];
        for (il, el) in self.elems.iter().enumerate() {
            let r = self.space.element_block(el.global);
            local[il * block..(il + 1) * block].copy_from_slice(&global.data()[r]);
        }
        local
    }

    /// Write patch coefficients back into the global vector.
    pub fn scatter(&self, local: &[f64], global: &mut FieldVector) {
        let block = N_FIELDS * self.ndof();
        for (il, el) in self.elems.iter().enumerate() {
            let r = self.space.element_block(el.global);
            global.data_mut()[r].copy_from_slice(&local[il * block..(il + 1) * block]);
        }
    }

    fn coupling_at(el: &TentElem, quasi_time: f64) -> Mat3 {
        let mut c = el.c0;
        for r in 0..3 {
            for s in 0..3 {
                c[r][s] += quasi_time * el.cprime[r][s];
            }
        }
        c
    }

    /// Worst slack of the coercivity bound over patch elements:
    /// min eig C(t) - (1 - |grad phi(t)| / sqrt(eps mu)) min(eps, mu).
    pub fn coercivity_margin(&self, quasi_time: f64) -> f64 {
        let mut worst = f64::INFINITY;
        for el in &self.elems {
            let c = Self::coupling_at(el, quasi_time);
            let g = [
                el.grad_phi_bottom[0] + quasi_time * el.grad_delta[0],
                el.grad_phi_bottom[1] + quasi_time * el.grad_delta[1],
            ];
            let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            let bound = (1.0 - gnorm / (el.eps * el.mu).sqrt()) * el.eps.min(el.mu);
            worst = worst.min(sym3_min_eigenvalue(&c) - bound);
        }
        worst
    }

    /// Smallest eigenvalue of any element coupling matrix at `quasi_time`.
    pub fn min_coupling_eigenvalue(&self, quasi_time: f64) -> f64 {
        self.elems
            .iter()
            .map(|el| sym3_min_eigenvalue(&Self::coupling_at(el, quasi_time)))
            .fold(f64::INFINITY, f64::min)
    }
}

impl TentOperators for TentSystem<'_> {
    fn n_dofs(&self) -> usize {
        self.elems.len() * N_FIELDS * self.ndof()
    }

    fn apply_m(&self, quasi_time: f64, u: &[f64], out: &mut [f64]) {
        let ndof = self.ndof();
        for (il, el) in self.elems.iter().enumerate() {
            let c = Self::coupling_at(el, quasi_time);
            let base = self.local_offset(il, 0);
            for r in 0..N_FIELDS {
                for k in 0..ndof {
                    let mut acc = 0.0;
                    for s in 0..N_FIELDS {
                        acc += c[r][s] * u[base + s * ndof + k];
                    }
                    out[base + r * ndof + k] = el.jdet * acc;
                }
            }
        }
    }

    fn apply_m_prime(&self, u: &[f64], out: &mut [f64]) {
        let ndof = self.ndof();
        for (il, el) in self.elems.iter().enumerate() {
            let base = self.local_offset(il, 0);
            for r in 0..N_FIELDS {
                for k in 0..ndof {
                    let mut acc = 0.0;
                    for s in 0..N_FIELDS {
                        acc += el.cprime[r][s] * u[base + s * ndof + k];
                    }
                    out[base + r * ndof + k] = el.jdet * acc;
                }
            }
        }
    }

    fn solve_m(&self, quasi_time: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let ndof = self.ndof();
        for (il, el) in self.elems.iter().enumerate() {
            let c = Self::coupling_at(el, quasi_time);
            let det = mat3_det(&c);
            // det C = mu (eps mu - |grad phi|^2) > 0 under causality
            if !(det > 1e-14 * el.mu * el.eps * el.mu) {
                return Err(Error::SingularMass {
                    element: el.global,
                    quasi_time,
                    det,
                });
            }
            let inv = mat3_inverse(&c, det);
            let base = self.local_offset(il, 0);
            for r in 0..N_FIELDS {
                for k in 0..ndof {
                    let mut acc = 0.0;
                    for s in 0..N_FIELDS {
                        acc += inv[r][s] * y[base + s * ndof + k];
                    }
                    out[base + r * ndof + k] = acc / el.jdet;
                }
            }
        }
        Ok(())
    }

    fn apply_a(&self, u: &[f64], out: &mut [f64]) {
        let ndof = self.ndof();
        out.fill(0.0);
        // volume terms: int delta f(u) : grad v per element
        for (il, el) in self.elems.iter().enumerate() {
            let oez = self.local_offset(il, EZ);
            let ohx = self.local_offset(il, HX);
            let ohy = self.local_offset(il, HY);
            for j in 0..ndof {
                let uez = u[oez + j];
                let uhx = u[ohx + j];
                let uhy = u[ohy + j];
                let gxr = &el.gx[j * ndof..(j + 1) * ndof];
                let gyr = &el.gy[j * ndof..(j + 1) * ndof];
                for i in 0..ndof {
                    out[oez + i] += uhx * gyr[i] - uhy * gxr[i];
                    out[ohx + i] += uez * gyr[i];
                    out[ohy + i] -= uez * gxr[i];
                }
            }
        }
        // facet terms: - int delta f_n(u+, u-) [v], jumps as (plus - minus);
        // patch-boundary facets are omitted since delta vanishes there
        for facet in &self.facets {
            let nq = facet.wdelta.len();
            let pez = self.local_offset(facet.plus_local, EZ);
            let phx = self.local_offset(facet.plus_local, HX);
            let phy = self.local_offset(facet.plus_local, HY);
            for q in 0..nq {
                let tp = &facet.trace_plus[q * ndof..(q + 1) * ndof];
                let mut up = [0.0; N_FIELDS];
                for k in 0..ndof {
                    up[EZ] += u[pez + k] * tp[k];
                    up[HX] += u[phx + k] * tp[k];
                    up[HY] += u[phy + k] * tp[k];
                }
                let um = match facet.minus_local {
                    Some(ml) => {
                        let mez = self.local_offset(ml, EZ);
                        let mhx = self.local_offset(ml, HX);
                        let mhy = self.local_offset(ml, HY);
                        let tm = &facet.trace_minus[q * ndof..(q + 1) * ndof];
                        let mut um = [0.0; N_FIELDS];
                        for k in 0..ndof {
                            um[EZ] += u[mez + k] * tm[k];
                            um[HX] += u[mhx + k] * tm[k];
                            um[HY] += u[mhy + k] * tm[k];
                        }
                        um
                    }
                    // PEC mirror ghost: E flips, H copies
                    None => [-up[EZ], up[HX], up[HY]],
                };
                let fnum =
                    upwind_flux_2d_with_penalty(up, um, facet.normal, self.flux_penalty);
                let w = facet.wdelta[q];
                for k in 0..ndof {
                    out[pez + k] -= w * fnum[EZ] * tp[k];
                    out[phx + k] -= w * fnum[HX] * tp[k];
                    out[phy + k] -= w * fnum[HY] * tp[k];
                }
                if let Some(ml) = facet.minus_local {
                    let mez = self.local_offset(ml, EZ);
                    let mhx = self.local_offset(ml, HX);
                    let mhy = self.local_offset(ml, HY);
                    let tm = &facet.trace_minus[q * ndof..(q + 1) * ndof];
                    for k in 0..ndof {
                        out[mez + k] += w * fnum[EZ] * tm[k];
                        out[mhx + k] += w * fnum[HX] * tm[k];
                        out[mhy + k] += w * fnum[HY] * tm[k];
                    }
                }
            }
        }
    }
}
