//! Numerical laboratory for the tradeoff between model size and robustness.
//!
//! The crate is organised by capability:
//!
//! - [`isodist`]: isoperimetric covariate samplers, label models, datasets
//!   and the empirical concentration checks.
//! - [`interp`]: explicit sum-of-bumps interpolators, with and without a
//!   random projection, tracing Lipschitz constant against parameter count.
//! - [`lipcert`]: empirical lower bounds and certified upper bounds on
//!   Lipschitz constants.
//! - [`netzoo`]: layered networks with skip connections and weight sharing,
//!   backpropagation and a full-batch trainer.
//! - [`theory`]: closed-form bound calculators and Monte Carlo validators.
//! - [`appendixlab`]: slab measure and sign-pattern cell occupancy on the sphere.
//! - [`runner`]: experiment orchestration, config parsing and report emission.
//!
//! Every randomized routine takes an explicit seed and is bit-for-bit
//! reproducible regardless of the rayon pool size.

pub mod appendixlab;
pub mod config;
pub mod error;
pub mod interp;
pub mod isodist;
pub mod lipcert;
pub mod netzoo;
pub mod runner;
pub mod seed;
pub mod theory;

pub use error::{LabError, Result};
