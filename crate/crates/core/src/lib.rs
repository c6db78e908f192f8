//! Sigma-basis linear-combination decompositions, unitary-completion circuit
//! synthesis and variational linear-solver cost evaluation.
//!
//! The crate is organised bottom-up:
//!
//! * [`sigma`]: the factor algebra, tensor terms and their dense realizations.
//! * [`decomposer`]: sigma decompositions of the heat-equation system and
//!   Pauli decompositions of arbitrary matrices.
//! * [`heat`]: the backward-Euler heat-equation system and a classical solve.
//! * [`circuit`]: gate-level IR, completion/dilation synthesis and the
//!   Hadamard-test circuits.
//! * [`simulator`]: exact statevector simulation and ancilla sampling.
//! * [`vqls`]: ansatz, state preparation, cost assembly and optimization.
//! * [`verify`]: self-check suites shared with the command-line front end.

pub mod circuit;
pub mod decomposer;
pub mod error;
pub mod heat;
pub mod matrix;
pub mod sigma;
pub mod simulator;
pub mod verify;
pub mod vqls;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use num_complex::Complex64;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
