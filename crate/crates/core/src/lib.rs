//! Equivariant Hopf bifurcation analysis and direct simulation for the
//! delayed Rosenzweig–MacArthur predator–prey system with predator-taxis on
//! a disk.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod lineal;
pub mod model;
pub mod normalform;
pub mod simulator;
pub mod spectrum;

pub use error::{Error, Result};
