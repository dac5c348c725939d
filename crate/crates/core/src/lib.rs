//! Density-matrix simulation of virtual distillation with two copies under
//! noisy controlled-SWAP circuits, the associated estimator statistics, and
//! the QAOA/MaxCut and thermal-mixture experiments built on top of them.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod distillation;
pub mod noise;
pub mod qaoa;
pub mod quantum;
pub mod record;
pub mod seed;

pub use error::{Error, Result};
