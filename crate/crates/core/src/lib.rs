//! Second-order two-scale modelling of coupled thermo-mechanical problems in
//! random composites with temperature-dependent constituents.

pub mod cell;
pub mod dns;
pub mod effective;
pub mod error;
pub mod fem;
pub mod macro_solver;
pub mod material;
pub mod microgen;
pub mod reconstruct;
pub mod report;
pub mod table;
pub mod tensor;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
