//! Hartree–Fock in a nonorthogonal atomic-orbital basis, formulated on the
//! one-particle density matrix.
//!
//! * [`linalg`]: dense symmetric/generalized eigensolvers, `S^{-1/2}`, `exp`.
//! * [`integrals`]: problem statement, AOINTS file format, synthetic systems.
//! * [`hf`]: `D ↔ Δ`, Fock build, energy, gradient, rotations, purification.
//! * [`scf`]: Roothaan–Hall SCF and exponential density-matrix descent.
//! * [`oracle`]: brute-force Fock-space realisation of the AO creation and
//!   annihilation operators, used to check the second-quantization identities.

pub mod error;
pub mod hf;
pub mod integrals;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod scf;
pub mod verify;

pub use error::{Error, Result};
