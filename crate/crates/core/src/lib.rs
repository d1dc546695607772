//! Simulation and analysis toolkit for a four-qubit superconducting linear
//! solver: state-vector engine, gate library, device model, compiled solver
//! and tomography.

pub mod circuit;
pub mod device;
pub mod error;
pub mod gates;
pub mod hhl;
pub mod linalg;
pub mod optimize;
pub mod qsim;
pub mod seeds;
pub mod tomography;

pub use error::{Error, Result};
