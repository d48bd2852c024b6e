//! Finite-volume Laplacian generator with classical solves and block-encoding
//! cost analysis (Pauli LCU and FABLE).

pub mod assembly;
pub mod config;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod reorder;
pub mod sparse;

pub use error::{Error, Result};
pub mod fable;
pub mod pauli;
pub mod report;
pub mod driver;
