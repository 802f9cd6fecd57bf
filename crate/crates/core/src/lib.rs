//! Bootstrap SIR particle filtering for scalar state-space models, with
//! direct and separate roughening, plus a seeded Monte Carlo harness for
//! studying how the propagation-noise variance used by the filter affects
//! tracking error (RMSE) and observation discrepancy (RMSD).
//!
//! Module map:
//!
//! - [`models`]: the [`StateSpaceModel`](models::StateSpaceModel) trait, the
//!   univariate nonlinear growth model (UNGM) and a linear-Gaussian model.
//! - [`sampling`]: seed-reproducible random streams and per-trial seed
//!   derivation.
//! - [`filter`]: propagation, weighting, normalization, resampling,
//!   roughening, state estimation and impoverishment diagnostics.
//! - [`metrics`]: RMSE against true states and RMSD against observations.
//! - [`experiments`]: trajectory simulation, trial campaigns, particle-count
//!   and propagation-variance sweeps, and the RMSD-argmin estimator.
//! - [`report`]: CSV serialization of sweep reports and trajectories.
//! - [`cli`]: the `sirpf` command-line front end.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod metrics;
pub mod models;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use experiments::{CampaignConfig, ExperimentReport, Preset, QGrid, ReportRow};
pub use filter::{FilterConfig, FilterOutput, ParticleEnsemble, Resampler, Roughening};
pub use models::{LinearGaussian, Model, ModelKind, ModelParams, StateSpaceModel, Ungm};
pub use sampling::RandomStream;
