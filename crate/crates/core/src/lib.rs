//! Simulation and equilibrium analysis of incoherent feedforward loops (IFFLs)
//! used as signal processors and as feedback controllers.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] defines the parameterised model family and its vector fields;
//! * [`ode`] integrates full and reduced systems with an adaptive
//!   Dormand–Prince 5(4) pair, detects steady states and runs step experiments;
//! * [`equilibrium`] computes closed-form and root-scanned equilibria, their
//!   stability, and open-loop asymptotic limits;
//! * [`sweep`] scans growth rate and gain to map elimination/proliferation bands;
//! * [`io`] parses experiment configs, dispatches experiments and writes
//!   plot-ready CSV/JSONL files.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases below fix the precision used by the command-line tool.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Oracle values are frozen at 17 significant digits.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod equilibrium;
pub mod error;
pub mod io;
pub mod model;
pub mod ode;
mod scalar;
pub mod sweep;

pub use error::{IfflError, Result};
pub use scalar::Scalar;

pub type ModelParams64 = model::ModelParams<f64>;
pub type InputSignal64 = model::InputSignal<f64>;
pub type FullState64 = model::FullState<f64>;
pub type ReducedState64 = model::ReducedState<f64>;
pub type IntegratorConfig64 = ode::IntegratorConfig<f64>;
pub type Trajectory64 = ode::Trajectory<f64>;
pub type EquilibriumReport64 = equilibrium::EquilibriumReport<f64>;
pub type SweepSpec64 = sweep::SweepSpec<f64>;
pub type BandReport64 = sweep::BandReport<f64>;

pub type ModelParams32 = model::ModelParams<f32>;
pub type FullState32 = model::FullState<f32>;
pub type ReducedState32 = model::ReducedState<f32>;
pub type IntegratorConfig32 = ode::IntegratorConfig<f32>;
pub type Trajectory32 = ode::Trajectory<f32>;
