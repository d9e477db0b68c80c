//! Stationary states, continuation and driven dynamics of a three-mode
//! nonlinear (Gross-Pitaevskii type) chain.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod lz;
pub mod model;
pub mod stationary;
pub mod stirap;

pub use error::{Error, Result};
pub use model::{ModelParams, StateVector};
