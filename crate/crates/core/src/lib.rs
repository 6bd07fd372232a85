//! Expected-free-energy (EFE) acquisition for hybrid learning-optimization.
//!
//! A single acquisition objective couples an epistemic term (expected
//! information gain about the quantity of interest) with a pragmatic term
//! (expected preference over outcomes), weighted by a curiosity coefficient.
//! The crate provides the information-theoretic primitives, three surrogate
//! model families (discrete hypothesis posteriors, exact Gaussian processes,
//! pairwise-probit preference models), coverage geometry for targeted search,
//! the acquisition rules and their baselines, ground-truth simulators, and a
//! seeded benchmark harness with CSV/SVG reporting.

pub mod acquisition;
pub mod cli;
pub mod coverage;
pub mod env;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod quad;
pub mod report;
pub mod rng;
pub mod surrogate;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
