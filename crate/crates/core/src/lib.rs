//! Monte Carlo simulation and analysis of the anisotropic 4D U(1)
//! lattice gauge-Higgs model in the London limit.

pub mod config;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod model;
pub mod observables;
pub mod oracles;
pub mod output;
pub mod profile;
pub mod scan;

pub use error::{Error, Result};
