//! Exact diagonalization and positivity certificates for single-hole
//! Hubbard-type models at infinite on-site repulsion.

pub mod corpus;
pub mod error;
pub mod hamiltonian;
pub mod manybody;
pub mod model;
pub mod model_file;
pub mod positivity;
#[cfg(test)]
mod properties;
pub mod reproduce;
pub mod sector;
pub mod sparse;
pub mod spectral;
pub mod spin;

pub use error::{Error, Result};
pub use model::{LatticeKind, LatticeModel, OnsiteU, PhononParams, RadiationParams};
pub use sector::{HoleSpinConfig, Magnetization, SectorBasis};
pub use sparse::{SparseMatrix, C64};
