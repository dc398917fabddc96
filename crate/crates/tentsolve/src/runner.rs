//! Slab-by-slab, tent-by-tent propagation and convergence studies.
//!
//! Within a slab, tents of the same dependency layer have element-disjoint
//! patches, so their updates touch disjoint segments of the global
//! coefficient vector. Layers are separated by a barrier; inside a layer the
//! tent tasks may run on a rayon pool. Each task returns its patch update,
//! which is applied after the layer completes, so results are bit-identical
//! for any worker count.

use crate::dg::{field_energy, l2_error, project, DGSpace, FieldVector, N_FIELDS};
use crate::error::{Error, Result};
use crate::maxwell::assemble_tent_system;
use crate::mesh::build_structured_triangle_mesh;
use crate::stepper::{rk4_propagate, sat_propagate, TentOperators};
use crate::tents::{assign_levels, check_slab, pitch_slab, SlabStats, Tent, TentSlab};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepperKind {
    Sat,
    Rk4,
}

impl std::fmt::Display for StepperKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepperKind::Sat => write!(f, "sat"),
            StepperKind::Rk4 => write!(f, "rk4"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    /// Standing TM mode on the PEC box [0,pi]^2:
    /// E_z = sin x sin y cos(sqrt2 t), H = curl-compatible sine products.
    StandingMode,
    /// Identically zero field.
    Zero,
}

/// Exact standing-mode fields at (x, t).
pub fn standing_mode(x: [f64; 2], t: f64) -> [f64; N_FIELDS] {
    let (sx, cx) = x[0].sin_cos();
    let (sy, cy) = x[1].sin_cos();
    let (st, ct) = (SQRT_2 * t).sin_cos();
    [
        sx * sy * ct,
        -1.0 / SQRT_2 * sx * cy * st,
        1.0 / SQRT_2 * cx * sy * st,
    ]
}

pub fn exact_solution(kind: SolutionKind) -> fn([f64; 2], f64) -> [f64; N_FIELDS] {
    match kind {
        SolutionKind::StandingMode => standing_mode,
        SolutionKind::Zero => |_x, _t| [0.0; N_FIELDS],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Structured mesh cells per direction.
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Polynomial degree p.
    pub degree: usize,
    pub final_time: f64,
    pub slab_height: f64,
    /// Causality safety factor sigma in (0,1).
    pub sigma: f64,
    pub stepper: StepperKind,
    /// SAT stages q; defaults to p + 1.
    pub stages: Option<usize>,
    /// Quasi-time subintervals m; defaults to 2p (min 1).
    pub subintervals: Option<usize>,
    pub eps: f64,
    pub mu: f64,
    pub solution: SolutionKind,
    /// Worker threads for layer-parallel execution; 0 = all cores.
    pub workers: usize,
    /// Jump-penalty scaling of the upwind flux. 0.5 is the characteristic
    /// (exact Riemann) penalty; 1.0 the plain tangential-jump form, which
    /// is stable only with more subintervals than the 2p default.
    pub flux_penalty: f64,
    /// Collect per-slab tiling/causality/coercivity/energy diagnostics.
    pub diagnostics: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            nx: 8,
            ny: 8,
            lx: std::f64::consts::PI,
            ly: std::f64::consts::PI,
            degree: 2,
            final_time: SQRT_2 * std::f64::consts::PI,
            slab_height: 1.0,
            sigma: 0.5,
            stepper: StepperKind::Sat,
            stages: None,
            subintervals: None,
            eps: 1.0,
            mu: 1.0,
            solution: SolutionKind::StandingMode,
            workers: 0,
            flux_penalty: 0.5,
            diagnostics: false,
        }
    }
}

impl SimulationConfig {
    pub fn stages_or_default(&self) -> usize {
        self.stages.unwrap_or(self.degree + 1)
    }

    pub fn subintervals_or_default(&self) -> usize {
        self.subintervals.unwrap_or((2 * self.degree).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("mesh cell counts must be positive"));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::invalid("final time must be positive"));
        }
        if !(self.slab_height > 0.0) {
            return Err(Error::invalid("slab height must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::invalid("sigma must lie in (0,1)"));
        }
        if !(self.eps > 0.0 && self.mu > 0.0) {
            return Err(Error::invalid("material parameters must be positive"));
        }
        if self.stages_or_default() < 1 || self.subintervals_or_default() < 1 {
            return Err(Error::invalid("stages and subintervals must be >= 1"));
        }
        if !(self.flux_penalty > 0.0) {
            return Err(Error::invalid("flux penalty must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlabDiagnostics {
    pub slab_start: f64,
    pub slab_end: f64,
    pub stats: SlabStats,
    /// max over elements and fronts of |grad tau| c - sigma.
    pub max_slope_excess: f64,
    /// Discrete field energy at the slab top.
    pub energy_at_top: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub initial_energy: f64,
    pub slabs: Vec<SlabDiagnostics>,
    /// min over tents, elements and quasi-times {0, 1/2, 1} of
    /// min_eig C - coercivity bound.
    pub coercivity_margin_min: f64,
    /// Smallest coupling-matrix eigenvalue seen anywhere.
    pub min_coupling_eigenvalue: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub solution: FieldVector,
    pub l2_error: f64,
    pub dofs: usize,
    pub h: f64,
    pub diagnostics: Option<RunDiagnostics>,
}

/// Run all tents of a slab layer by layer against a shared state. Within a
/// layer, tasks read the state concurrently on `workers` threads (0 = all
/// cores; 1 = strictly serial); `apply` folds each task result back into
/// the state after the layer barrier, in tent order, so layer k+1 sees all
/// of layer k. A failing task aborts the slab with its tent id.
pub fn execute_layers<S, T, F, G>(
    slab: &TentSlab,
    workers: usize,
    state: &mut S,
    task: F,
    mut apply: G,
) -> Result<()>
where
    S: Sync,
    T: Send,
    F: Fn(&S, usize, &Tent) -> Result<T> + Sync,
    G: FnMut(&mut S, usize, T) -> Result<()>,
{
    for layer in &slab.levels {
        let results = {
            let state_ref: &S = state;
            run_layer(slab, layer, workers, &|idx, tent| task(state_ref, idx, tent))
        };
        for (idx, res) in layer.iter().copied().zip(results) {
            match res {
                Ok(value) => apply(state, idx, value)?,
                Err(e) => {
                    return Err(Error::TentTask {
                        tent: idx,
                        source: Box::new(e),
                    })
                }
            }
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn run_layer<T, F>(slab: &TentSlab, layer: &[usize], workers: usize, task: &F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize, &Tent) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    if workers == 1 || layer.len() == 1 {
        return layer
            .iter()
            .map(|&idx| task(idx, &slab.tents[idx]))
            .collect();
    }
    let body = || {
        layer
            .par_iter()
            .map(|&idx| task(idx, &slab.tents[idx]))
            .collect()
    };
    if workers == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("failed to build worker pool");
        pool.install(body)
    }
}

#[cfg(not(feature = "parallel"))]
fn run_layer<T, F>(slab: &TentSlab, layer: &[usize], _workers: usize, task: &F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize, &Tent) -> Result<T> + Sync,
{
    layer
        .iter()
        .map(|&idx| task(idx, &slab.tents[idx]))
        .collect()
}

struct TentUpdate {
    /// Patch element ids in the same order as the local coefficient blocks.
    elements: Vec<usize>,
    local: Vec<f64>,
    coercivity_margin: f64,
    min_eigenvalue: f64,
}

/// Propagate the configured problem from t = 0 to the final time.
///
/// The initial condition is L2-projected once; afterwards tent tops feed
/// tent bottoms directly with no further projection. The transferred
/// quantity between tents is the coefficient vector U; each tent forms
/// Y = M(0) U with its own bottom front and converts back at its top.
pub fn run(config: &SimulationConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mesh = Arc::new(build_structured_triangle_mesh(
        config.lx, config.ly, config.nx, config.ny,
    )?);
    let space = DGSpace::new(mesh.clone(), config.degree);
    let exact = exact_solution(config.solution);
    let mut u = project(&space, exact, 0.0);

    let nelem = mesh.n_elements();
    let eps = vec![config.eps; nelem];
    let mu = vec![config.mu; nelem];
    let wavespeed: Vec<f64> = (0..nelem)
        .map(|e| 1.0 / (eps[e] * mu[e]).sqrt())
        .collect();
    let stages = config.stages_or_default();
    let subintervals = config.subintervals_or_default();
    let penalty = config.flux_penalty;

    let mut diagnostics = if config.diagnostics {
        Some(RunDiagnostics {
            initial_energy: field_energy(&space, &u, &eps, &mu),
            slabs: Vec::new(),
            coercivity_margin_min: f64::INFINITY,
            min_coupling_eigenvalue: f64::INFINITY,
        })
    } else {
        None
    };

    let mut t = 0.0;
    while t < config.final_time - 1e-13 * config.final_time {
        let height = config.slab_height.min(config.final_time - t);
        let mut slab = pitch_slab(mesh.clone(), &wavespeed, t, height, config.sigma)?;
        assign_levels(&mut slab);

        let mut slab_margin = f64::INFINITY;
        let mut slab_mineig = f64::INFINITY;
        execute_layers(
            &slab,
            config.workers,
            &mut u,
            |state: &FieldVector, _idx, tent| -> Result<TentUpdate> {
                let system = assemble_tent_system(&space, tent, &eps, &mu, penalty)?;
                let u_bottom = system.gather(state);
                let mut y = vec![0.0; u_bottom.len()];
                system.apply_m(0.0, &u_bottom, &mut y);
                let y_top = match config.stepper {
                    StepperKind::Sat => sat_propagate(&system, &y, stages, subintervals)?,
                    StepperKind::Rk4 => rk4_propagate(&system, &y, subintervals)?,
                };
                let mut u_top = vec![0.0; u_bottom.len()];
                system.solve_m(1.0, &y_top, &mut u_top)?;
                let (mut margin, mut mineig) = (f64::INFINITY, f64::INFINITY);
                if config.diagnostics {
                    for quasi_time in [0.0, 0.5, 1.0] {
                        margin = margin.min(system.coercivity_margin(quasi_time));
                        mineig = mineig.min(system.min_coupling_eigenvalue(quasi_time));
                    }
                }
                Ok(TentUpdate {
                    elements: system.patch_globals().collect(),
                    local: u_top,
                    coercivity_margin: margin,
                    min_eigenvalue: mineig,
                })
            },
            |state: &mut FieldVector, _idx, upd: TentUpdate| {
                let block = N_FIELDS * space.ndof_scalar();
                for (il, &e) in upd.elements.iter().enumerate() {
                    let r = space.element_block(e);
                    state.data_mut()[r].copy_from_slice(&upd.local[il * block..(il + 1) * block]);
                }
                slab_margin = slab_margin.min(upd.coercivity_margin);
                slab_mineig = slab_mineig.min(upd.min_eigenvalue);
                Ok(())
            },
        )?;

        if let Some(diag) = diagnostics.as_mut() {
            let check = check_slab(&slab, &wavespeed, config.sigma);
            diag.slabs.push(SlabDiagnostics {
                slab_start: slab.slab_start,
                slab_end: slab.slab_end,
                stats: slab.stats(),
                max_slope_excess: check.max_slope_excess,
                energy_at_top: field_energy(&space, &u, &eps, &mu),
            });
            diag.coercivity_margin_min = diag.coercivity_margin_min.min(slab_margin);
            diag.min_coupling_eigenvalue = diag.min_coupling_eigenvalue.min(slab_mineig);
        }
        t = slab.slab_end;
    }

    let err = l2_error(&space, &u, exact, config.final_time);
    Ok(RunOutcome {
        solution: u,
        l2_error: err,
        dofs: space.n_dofs(),
        h: mesh.h_max(),
        diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub error: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub stepper: StepperKind,
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Observed rate between the two finest levels.
    pub fn final_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }
}

/// Run the configured problem on a sequence of meshes with h halved per
/// level and report errors and observed rates log2(e_{k-1} / e_k).
pub fn convergence_study(base: &SimulationConfig, levels: usize) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::invalid("convergence study needs levels >= 2"));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for level in 0..levels {
        let mut cfg = base.clone();
        cfg.nx = base.nx << level;
        cfg.ny = base.ny << level;
        let out = run(&cfg)?;
        let rate = rows
            .last()
            .map(|prev: &ConvergenceRow| (prev.error / out.l2_error).log2());
        rows.push(ConvergenceRow {
            level,
            h: out.h,
            dofs: out.dofs,
            error: out.l2_error,
            rate,
        });
    }
    Ok(ConvergenceReport {
        stepper: base.stepper,
        degree: base.degree,
        rows,
    })
}
