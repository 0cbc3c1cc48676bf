//! Deterministic velocity-space solver for the spatially homogeneous Landau
//! equation with soft potentials `γ ∈ [-2, 0)`, plus the diagnostics that
//! track its conserved quantities, entropy dissipation, moments and norms.
//!
//! The crate is IO-free; file formats and the command line live in
//! `landau-cli`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod collision;
pub mod convolution;
pub mod diagnostics;
pub mod error;
mod fft;
pub mod grid;
pub mod harness;
pub mod inequalities;
pub mod initial;
pub mod integrator;
pub mod kernel;
pub mod reduce;
pub mod sym3;

pub use error::{LandauError, Result};
pub use diagnostics::DiagnosticsRecord;
pub use grid::{MatrixField, ScalarField, VectorField, VelocityGrid};
pub use initial::InitialCondition;
pub use integrator::{SimulationConfig, Trajectory};
pub use kernel::{Gamma, KernelTables};
pub use sym3::Sym3;
