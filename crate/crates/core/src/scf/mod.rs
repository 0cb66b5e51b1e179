//! Two routes to the stationary point `F D S = S D F`.
//!
//! [`scf_roothaan`] iterates the generalized eigenproblem `F C = S C ε` with
//! aufbau occupation and optional DIIS. [`scf_density_descent`] never forms
//! orbitals while iterating: it moves `D` along projected orbital-rotation
//! gradients through `D̃ = exp(XS) D exp(−SX)` and only diagonalizes once at the
//! end to report orbital energies. [`verify_equivalence`] checks both
//! directions of the equivalence between the two forms of the stationarity
//! condition.

mod descent;
mod diis;
mod equivalence;
mod roothaan;

pub use descent::{scf_density_descent, scf_density_descent_from};
pub use diis::{diis_error, diis_extrapolate, DiisExtrapolation};
pub use equivalence::{
    verify_equivalence, EquivalenceReport, EQUIVALENCE_TOL, VERIFY_GRADIENT_TOL,
};
pub use roothaan::{scf_roothaan, scf_roothaan_from};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hf::density::complementary_frames;
use crate::hf::{DensityMatrix, FockMatrix};
use crate::integrals::AoSystem;
use crate::linalg::{self, EigenDecomposition, Matrix};

/// Two orbital energies closer than this at the Fermi level are treated as
/// degenerate.
pub const FRONTIER_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Roothaan,
    DensityDescent,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Roothaan => "roothaan",
            Solver::DensityDescent => "density_descent",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roothaan" => Ok(Solver::Roothaan),
            "density_descent" | "descent" => Ok(Solver::DensityDescent),
            other => Err(Error::InvalidOptions(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub energy_tolerance: f64,
    /// Bound on `‖FDS − SDF‖_max`.
    pub gradient_tolerance: f64,
    /// History length for DIIS; 0 disables it.
    pub diis_depth: usize,
    /// First trial step of the descent line search.
    pub initial_step: f64,
    pub solver: Solver,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            energy_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            diis_depth: 8,
            initial_step: 1.0,
            solver: Solver::Roothaan,
        }
    }
}

impl ScfOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.energy_tolerance) || !positive(self.gradient_tolerance) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        if !positive(self.initial_step) {
            return Err(Error::InvalidOptions(
                "initial step must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub gradient_max: f64,
    /// Accepted step length (descent) or DIIS subspace dimension (Roothaan).
    pub step: f64,
    pub idempotency_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfSolution {
    pub solver: Solver,
    pub density: DensityMatrix,
    pub fock: FockMatrix,
    pub energy: f64,
    /// Occupied block ascending, then virtual block ascending.
    pub orbital_energies: Vec<f64>,
    /// `Cᵀ S C = I`; the first `occupied_count` columns span the density.
    pub coefficients: Matrix,
    pub occupied_count: usize,
    pub gradient_max: f64,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    /// Why the solver stopped early, when it did.
    pub stall_reason: Option<String>,
}

impl ScfSolution {
    pub fn occupied_coefficients(&self) -> Matrix {
        self.coefficients
            .columns(0, self.occupied_count)
            .into_owned()
    }
}

/// Lowest `n` columns of a generalized eigendecomposition, refusing a
/// degenerate frontier.
pub fn aufbau(eig: &EigenDecomposition, n: usize) -> Result<Matrix> {
    let m = eig.values.len();
    if n > m {
        return Err(Error::InvalidSystem(format!(
            "cannot occupy {n} of {m} orbitals"
        )));
    }
    if n > 0 && n < m {
        let homo = eig.values[n - 1];
        let lumo = eig.values[n];
        if lumo - homo <= FRONTIER_DEGENERACY_TOL {
            return Err(Error::FrontierDegeneracy { n, homo, lumo });
        }
    }
    Ok(eig.vectors.columns(0, n).into_owned())
}

/// Core-Hamiltonian guess: aufbau occupation of `h C = S C ε`.
pub fn core_guess(system: &AoSystem) -> Result<DensityMatrix> {
    let eig = linalg::generalized_eig(&system.core_h, &system.metric)?;
    let c_occ = aufbau(&eig, system.n_electrons)?;
    Ok(DensityMatrix::from_coefficients(&c_occ))
}

/// Orbitals that span `D` exactly, with `F` diagonal inside the occupied and
/// inside the virtual block.
pub(crate) fn canonical_orbitals(
    d: &DensityMatrix,
    f: &FockMatrix,
    s: &Matrix,
    n: usize,
) -> Result<(Vec<f64>, Matrix)> {
    let m = d.order();
    let frames = complementary_frames(d, s)?;
    let mut coefficients = Matrix::zeros(m, m);
    let mut energies = Vec::with_capacity(m);
    // Occupied frames are the last `n` columns.
    let blocks = [(m - n, n, 0), (0, m - n, n)];
    for (start, len, dst) in blocks {
        if len == 0 {
            continue;
        }
        let block = frames.columns(start, len).into_owned();
        let projected = linalg::symmetrize(&(block.transpose() * f.matrix() * &block));
        let eig = linalg::sym_eig(&projected)?;
        let rotated = block * eig.vectors;
        coefficients.columns_mut(dst, len).copy_from(&rotated);
        energies.extend(eig.values);
    }
    Ok((energies, coefficients))
}

#[cfg(test)]
mod tests;
