//! Locally risk-minimizing hedge ratios for European options under IG-OU
//! Barndorff-Nielsen–Shephard models whose asset price is not a martingale.
//!
//! The hedge ratio of a put is assembled from three Monte Carlo estimates
//! taken under the minimal martingale measure: a digital-style term, the put
//! price itself, and an integral of put prices from jump-shifted starting
//! states against the leverage-weighted Lévy density. The call ratio follows
//! as `ξ_call = 1 + ξ_put`.
//!
//! Module map:
//!
//! - [`levy_kernel`]: Lévy density, closed-form constants, truncation bands.
//! - [`bns_model`]: parameters, positivity conditions, MMM coefficients.
//! - [`path_engine`]: weighted path simulation with counter-keyed streams.
//! - [`mc_pricer`]: put/call prices and the digital term from path ensembles.
//! - [`quadrature`]: z-grids and the trapezoidal rule against `g_ν`.
//! - [`lrm_engine`]: hedge-ratio assembly and strike sweeps.
//! - [`cli_reporting`]: run configuration, CSV, SVG plots, manifests.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bns_model;
pub mod cli_reporting;
pub mod error;
pub mod levy_kernel;
pub mod lrm_engine;
pub mod mc_pricer;
pub mod path_engine;
pub mod quad;
pub mod quadrature;
pub mod rng;

pub use bns_model::{check_assumption, AssumptionReport, MmmCoefficients, ModelParams};
pub use error::{Error, Result};
pub use levy_kernel::LevyKernel;
pub use lrm_engine::{lrm_call, lrm_put, strike_sweep, LrmResult, Sweep};
pub use mc_pricer::McEstimate;
pub use path_engine::{McConfig, PathEngine, PathSample, Weighting};
pub use quadrature::{GridSpec, QuadratureGrid};

