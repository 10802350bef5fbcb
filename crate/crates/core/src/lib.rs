//! Construction, simulation and ambient-data identification of small-signal
//! state matrices for multi-machine AC systems with integrated voltage-source
//! converters.
//!
//! The crate is organized as a pipeline:
//!
//! - [`netmodel`] builds the ground-truth linearization (open-loop `A`, `B`,
//!   `S` and closed-loop `A_c`) from physical parameters.
//! - [`sim`] integrates the stochastic swing dynamics to emulate ambient
//!   PMU records, and provides the analytic Ornstein-Uhlenbeck oracles.
//! - [`estimator`] recovers `A_c` from a record through lag correlations and
//!   the principal matrix logarithm.
//! - [`modal`] extracts modes, shapes and participation factors and pairs
//!   estimated with true modes.
//! - [`fixtures`] bundles desk-scale test systems and scripted experiments.
//! - [`cli`] exposes all of the above as commands.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod linalg;
pub mod modal;
pub mod netmodel;
pub mod sim;

pub use error::{Error, Result};
