use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("metric is not positive definite (smallest eigenvalue {smallest:e})")]
    NotPositiveDefinite { smallest: f64 },

    #[error(
        "basis is nearly linearly dependent (eigenvalue ratio {smallest:e} / {largest:e} below 1e-10)"
    )]
    LinearDependence { smallest: f64, largest: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error(
        "frontier orbitals are degenerate (e_{n} = {homo}, e_{next} = {lumo}); choose an occupation explicitly",
        next = n + 1
    )]
    FrontierDegeneracy { n: usize, homo: f64, lumo: f64 },

    #[error("purification did not converge in {iterations} iterations (residual {residual:e})")]
    PurificationFailed { iterations: usize, residual: f64 },

    #[error("occupied coefficients are not S-orthonormal (Gram residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("Fock-space size 2^{m} exceeds the cap 2^{cap} (would need about {bytes} bytes)")]
    OracleCap { m: usize, cap: usize, bytes: u128 },

    #[error("expectation value has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("solution is not converged")]
    Unconverged,

    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
