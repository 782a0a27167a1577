//! Flow-level simulation of a backhaul-constrained heterogeneous cellular
//! network with self-organized load balancing.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: layout, propagation, attachment and the rasterized service area.
//! - [`loadcalc`]: measured and analytic base-station loads, local and backhaul-aware.
//! - [`flowsim`]: the time-stepped flow-level simulator and its KPIs.
//! - [`son`]: the stochastic-approximation CIO controller.
//! - [`scenario`] and [`experiment`]: configuration, runs, sweeps and output files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod flowsim;
pub mod geometry;
pub mod loadcalc;
pub mod scenario;
pub mod son;
mod table;

pub use error::{Error, Result};
pub use geometry::{CellConfig, CellId, CellKind, Position, RadioEnvironment};
pub use son::{SonConfig, SonState, SonVariant};
