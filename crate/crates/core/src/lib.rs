//! Clustering of functional data with sampling-based neural operators.
//!
//! The crate is organised along the pipeline:
//!
//! * [`dynsys`] generates the ODE benchmark datasets (ODE-6 and ODE-4).
//! * [`registration`] turns trajectories into fixed-size grids and augments them.
//! * [`featmap`] holds the frozen feature maps applied to registered grids.
//! * [`clusterhead`] is the trainable head, its objective and the training loop.
//! * [`baselines`] and [`metrics`] provide the classical comparisons.
//! * [`kuratowski`] checks the set-convergence theory on finite kernel spaces.

pub mod baselines;
pub mod clusterhead;
pub mod dynsys;
pub mod error;
pub mod featmap;
pub mod kuratowski;
pub mod linalg;
pub mod metrics;
pub mod registration;
pub mod rng;

pub use error::{Error, Result};
