//! Simulation of case/control phenotypes conditional on fixed genotypes, a
//! disease model and an exact number of cases, and the power studies built
//! on top of it.
//!
//! The crate is organised bottom-up:
//!
//! * [`sampling`]: constrained Bernoulli sampling (backward tables, rejection,
//!   MCMC, permutation, multi-class).
//! * [`model`]: disease models mapping genotypes to case probabilities.
//! * [`genotype`]: genotype matrices, file formats and synthetic datasets.
//! * [`assoc`]: Cochran-Armitage trend test and the radius statistic.
//! * [`roc`]: ROC curves, AUC and DeLong confidence intervals.
//! * [`harness`]: replicate engine, experiment configuration and benchmarks.

pub mod assoc;
pub mod error;
pub mod genotype;
pub mod harness;
pub mod model;
pub mod roc;
pub mod sampling;
pub mod seed;

pub use error::{Error, Result};
