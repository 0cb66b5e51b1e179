//! Brute-force Fock-space realisation of the AO field operators.
//!
//! Orthonormal mode operators `b†_p` are built on the `2^M` occupation basis
//! with the usual sign string; AO operators follow as `a†_μ = Σ_p V_{μp} b†_p`
//! with `V = S^{1/2}`, which gives `{a†_μ, a_ν} = S_{νμ}`. Everything the
//! density-matrix code assumes (`Δ = S D S`, the Wick factorisation, the
//! cancellation of inverse metrics in the energy, the transformation law of
//! `Δ` under `exp(iκ̂)`) can then be checked against explicit states.
//!
//! Operators are stored as sparse CSR matrices: at the 14-mode cap a dense
//! operator would need 4 GiB, while each AO operator has `M·2^{M−1}` entries.

mod hamiltonian;
mod operators;
mod rotation;
mod state;

pub use hamiltonian::{
    build_h0, energy_from_h0, expectation_value, hermiticity_residual, oracle_energy,
};
pub use operators::{
    build_ao_operators, build_mode_operators, memory_estimate, AnticommutatorResiduals,
    FockSpaceRep, ModeOperators,
};
pub use rotation::{
    apply_kappa_rotation, apply_real_kappa_rotation, complex_expm, delta_transform_reference,
    to_complex, verify_transform_consistency, TransformConsistency, HERMITIAN_TOL,
};
pub use state::{
    determinant_state, expectation_delta, expectation_delta_complex, expectation_gamma, real_part,
    verify_wick, ManyBodyState, Tensor4, GRAM_TOL,
};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

pub type Complex = num_complex::Complex64;
pub type ComplexMatrix = DMatrix<Complex>;
pub type ComplexVector = DVector<Complex>;
pub type SparseOperator = CsrMatrix<Complex>;

/// Largest mode count for the one-body machinery (`2^14 = 16384` states).
pub const MAX_MODES: usize = 14;
/// Largest mode count for the explicit Hamiltonian matrix.
pub const MAX_MODES_TWO_BODY: usize = 10;
/// Imaginary parts above this turn a real expectation value into an error.
pub const IMAGINARY_TOL: f64 = 1e-12;
