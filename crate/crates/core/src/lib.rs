//! Geometric hard-core discretizations of hard-constraint point processes.
//!
//! A hard-constraint point process on the cube `[0, ℓ)^d` is described by a
//! [`ModelSpec`](model::ModelSpec): an interaction matrix of minimum distances
//! between particle types and a fugacity per type. Placing a finite point set
//! in the region and connecting `(x, i)` with `(y, j)` whenever the two
//! particles would violate their distance constraint yields a weighted
//! hard-core model whose partition function approximates the continuous one.
//!
//! The crate covers the whole pipeline:
//!
//! * [`model`]: the continuous model, its volume exclusion matrix and the
//!   approximability conditions,
//! * [`discretize`]: point sets, allocations, graph construction and the
//!   resolution / error calculators,
//! * [`hardcore`]: exact partition functions and marginals of small graphs,
//! * [`glauber`]: Glauber dynamics sampling,
//! * [`estimate`]: randomized (self-reducibility) and deterministic
//!   (correlation decay) estimators of `ln Z`,
//! * [`continuous`]: validity, closed-form and Monte Carlo oracles, and the
//!   perturbation sampler for continuous configurations,
//! * [`experiments`]: tightness and concentration experiments.

pub mod cli;
pub mod config;
pub mod continuous;
pub mod discretize;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod glauber;
pub mod hardcore;
pub mod logweight;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use logweight::LogWeight;
