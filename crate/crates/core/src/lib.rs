//! Simulation and validation toolkit for Boson Sampling devices.
//!
//! Samples are generated under five models (exact and MCMC indistinguishable
//! bosons, distinguishable particles, mean-field, uniform) and compared with
//! clustering-based two-sample χ² tests that decide whether an untrusted
//! sample is compatible with a trusted one.

pub mod analysis;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod fock;
pub mod sampler;
pub mod seed;
pub mod validation;

pub use error::{Error, Result};
