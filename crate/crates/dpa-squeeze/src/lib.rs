//! Spin squeezing driven by a fully quantum degenerate parametric amplifier.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`], [`sparse`], [`operator`], [`state`]: truncated tensor-product
//!   spaces, sparse operators and states.
//! * [`params`], [`model`]: physical parameters, derived quantities and the
//!   full / effective / two-axis-twisting / eliminated models.
//! * [`dynamics`]: an adaptive 8th-order Runge-Kutta integrator, the Lindblad
//!   solver and the quantum-jump Monte Carlo solver.
//! * [`observables`]: Wineland squeezing, Husimi Q and pump fidelity.
//! * [`meanfield`]: the Holstein-Primakoff mean-field equations for large N.
//! * [`runner`]: presets, configuration and artifact output used by the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod observables;
pub mod operator;
pub mod params;
pub mod runner;
pub mod space;
pub mod sparse;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use model::Model;
pub use operator::Operator;
pub use params::{DerivedParams, ModelParams};
pub use space::{Factor, SpaceLayout};
pub use state::QuantumState;
