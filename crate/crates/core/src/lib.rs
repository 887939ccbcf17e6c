//! Selection-and-crossover global search on random multilinear cost
//! functions over `{-1, +1}^N`, with the Gaussian extreme-value predictors
//! that describe it and a harness that reproduces the standard comparison
//! experiments (random search, two-parent crossover, mean-field mixing).
//!
//! Module map:
//! - [`polycost`]: cost-function sampling, evaluation, flip deltas,
//!   exhaustive minimization and serialization.
//! - [`evt`]: closed-form predictors for Gaussian minima and offspring.
//! - [`search`]: the stochastic searchers.
//! - [`harness`]: experiment configs, CSV tables and SVG plots.
//!
//! Work fans out over rayon with the default `parallel` feature; build
//! with `--no-default-features` for a purely sequential library.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combin;
pub mod error;
pub mod evt;
pub mod harness;
pub mod par;
pub mod polycost;
pub mod rng;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use evt::{GaussianSpec, MinForm, MixturePrediction, TheoryParams};
pub use polycost::{sample_cost_function, CostFunction, Limits, State};
pub use search::{CrossoverConfig, CrossoverScheme, SearchResult};
pub use stats::RunningStats;
