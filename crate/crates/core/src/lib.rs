pub mod bipartivity;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod eval;
pub mod graph;
mod krylov;
pub mod learn;
pub mod manifest;
pub mod nnls;
pub mod predict;
pub mod search;
pub mod sparse;
pub mod svd;
pub mod transform;

pub use error::{Error, Result};
