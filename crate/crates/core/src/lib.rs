//! Sparse ReQU networks: a calculus of network operations, exact matrix
//! product networks, Neumann-series inversion networks and reduced-basis
//! approximations of parametric diffusion problems.

pub mod calculus;
pub mod error;
pub mod matrix_nets;
pub mod network;
pub mod oracle;
pub mod pde;
pub mod sparse;

pub use error::{Error, Result};
pub use network::{ComplexityReport, Layer, Network};
pub use sparse::SparseMatrix;
