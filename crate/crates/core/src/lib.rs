//! Acoustical-geometry reformulation of compressible Euler flow with entropy:
//! equation of state, periodic grid fields, the acoustical metric and its null
//! frames, residual checks of the second-order system, and a 1D shock-formation
//! study.

pub mod checks;
pub mod eos;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod grid;
pub mod null_frame;
pub mod reform;
pub mod run;
pub mod shock1d;
pub mod state;
pub mod tensor;

pub use eos::{EosConfig, EosKind, EosModel, EosPoint};
pub use error::{Error, Result};
pub use evolve::{SliceStack, build_slice_stack, complete_initial_data, euler_rhs, rk4_step};
pub use grid::{Grid, ScalarField, StencilOrder, VectorField};
pub use state::{DerivedState, FluidState, compute_derived};
