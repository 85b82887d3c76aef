//! Deterministic finite-difference simulator for small-strain quasicrystal
//! dynamics: an elastodynamic displacement field u coupled to a diffusive
//! phason field ν on a rectangular grid with Dirichlet boundary data.
//!
//! The library is organized in layers:
//!
//! - [`material`] — constitutive constants, derived PDE coefficients,
//!   admissibility checks, pointwise stress/energy maps;
//! - [`grid`] / [`field`] / [`ops`] — the rectangular grid, node-indexed
//!   vector fields, and the centered difference operators built so that
//!   the discrete integration-by-parts identities hold to rounding;
//! - [`solve`] — matrix-free MINRES and a dense direct fallback;
//! - [`dynamics`] — the implicit midpoint time stepper for the linear,
//!   regularized, and gyro-coupled systems;
//! - [`diagnostics`] — per-step energy reports, the discrete energy
//!   ledger, a priori bound monitoring, viscosity and grid-refinement
//!   studies, and uniqueness probes;
//! - [`config`] / [`io`] / [`scenario`] — run configuration parsing,
//!   CSV/snapshot output, and canned demonstration scenarios.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod material;
pub mod ops;
pub mod scenario;
pub mod solve;

pub use error::{Error, Result};
