//! Estimation of sublevel-set persistence diagrams of piecewise Hölder
//! signals observed with Gaussian noise on a regular grid.
//!
//! The pipeline is
//!
//! 1. sample a [`signals::SignalSpec`] on a [`grid::GridSpec`] and add noise,
//! 2. average the observations over blocks of side `h` ([`estimator`]),
//! 3. build the cubical complex of the union of closed blocks and reduce it
//!    ([`persistence`]),
//! 4. compare against the true diagram with the bottleneck distance
//!    ([`metrics`]).
//!
//! The [`harness`] module runs whole Monte Carlo experiments on top of these
//! pieces and writes plot-ready CSV.

pub mod diagram;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod persistence;
pub mod rng;
pub mod signals;

pub use diagram::{DiagramPoint, PersistenceDiagram};
pub use error::{Error, Result};
pub use estimator::{BlockField, Bandwidth};
pub use grid::{GridSpec, ScalarField};
pub use rng::SeedStream;
pub use signals::{NoiseModel, SignalSpec};
