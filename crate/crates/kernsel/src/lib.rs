//! Kernel smoothing with data-driven bandwidth selection.
//!
//! The estimators here treat kernel regression as a quotient: a
//! response-weighted smooth of the product `b*f` over a kernel density
//! estimate of `f`, each side with its own bandwidth. Equal bandwidths give
//! back the classical Nadaraya-Watson estimator. The crate provides
//!
//! * [`kernel`] — signed Gaussian-mixture kernels (the order-7 preset and
//!   the plain Gaussian) with exact inner products, convolutions and
//!   moments;
//! * [`estimators`] — density, numerator, doubly smoothed and quotient
//!   curves on an evaluation grid, plus leave-one-out prediction;
//! * [`selection`] — PCO, Goldenshluger-Lepski and cross-validation
//!   bandwidth selectors, and the per-sample oracle benchmark;
//! * [`numerics`] — quantiles, interquantile grids and the Riemann L2
//!   distance every criterion shares;
//! * [`simulation`] — benchmark models and a seeded, parallel Monte-Carlo
//!   harness producing error tables.

pub mod error;
pub mod estimators;
pub mod kernel;
pub mod numerics;
pub mod quad;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
pub use estimators::{Curve, Grid, Sample};
pub use kernel::{Bandwidth, GaussianMixtureKernel};
pub use numerics::QuantileSpec;
pub use selection::{BandwidthGrid, SelectionResult};
pub use simulation::{ExperimentConfig, MISEReport, Method, ModelSpec, Target};
