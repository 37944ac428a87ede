//! Differentiable DAG structure learning.
//!
//! The crate provides graph generators and the smooth acyclicity functional,
//! linear and Gaussian-process SEM simulators, small dense networks with
//! manual backpropagation, the CASPER learner (a fitting model trained
//! against a critic whose Lipschitz budget shrinks with the DAG-ness `h`)
//! alongside NOTEARS / NOTEARS-MLP baselines, and structure metrics.

pub mod error;
pub mod graph;
pub mod io;
pub mod learner;
pub mod metrics;
pub mod nn;
pub mod par;
pub mod sem;

pub use error::{Error, Result};
