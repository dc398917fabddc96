//! Explicit mapped tent pitching (MTP) solver for the time-dependent
//! Maxwell system on unstructured simplicial meshes.
//!
//! The solver advances the solution through tent-shaped spacetime regions
//! pitched under a causality constraint, maps each tent to a cylinder, and
//! integrates the transformed DG system there with structure-aware Taylor
//! (SAT) time-stepping. A classical Runge-Kutta comparator is included to
//! reproduce its quasi-time order reduction.

pub mod basis;
pub mod dg;
pub mod error;
pub mod maxwell;
pub mod mesh;
pub mod quad;
pub mod runner;
pub mod stepper;
pub mod tents;

pub use error::{Error, Result};
