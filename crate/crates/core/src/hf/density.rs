use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Idempotency residual accepted as a valid single-determinant density.
pub const IDEMPOTENCY_TOL: f64 = 1e-10;

const PURIFY_TARGET: f64 = 1e-12;
const PURIFY_MAX_ITERATIONS: usize = 20;
const PURIFY_MAX_START_RESIDUAL: f64 = 0.1;

/// AO density matrix `D = C_occ C_occᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    /// Wraps a symmetric, finite matrix. Idempotency and trace are not checked
    /// here; see [`check_density_conditions`].
    pub fn new(matrix: Matrix) -> Result<Self> {
        linalg::ensure_symmetric(&matrix)?;
        Ok(Self(linalg::symmetrize(&matrix)))
    }

    pub fn zeros(m: usize) -> Self {
        Self(Matrix::zeros(m, m))
    }

    /// `C_occ C_occᵀ` from an `M × N` coefficient block.
    pub fn from_coefficients(c_occ: &Matrix) -> Self {
        Self(linalg::symmetrize(&(c_occ * c_occ.transpose())))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }
}

/// One-electron expectation-value matrix `Δ_{μν} = <a†_μ a_ν>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationMatrix(Matrix);

impl ExpectationMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        linalg::ensure_symmetric(&matrix)?;
        Ok(Self(linalg::symmetrize(&matrix)))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// `Δ = S D S` (all matrices real symmetric, so the transposes drop).
pub fn delta_from_d(d: &DensityMatrix, s: &Matrix) -> ExpectationMatrix {
    ExpectationMatrix(linalg::symmetrize(&(s * d.matrix() * s)))
}

/// `D = S⁻¹ Δ S⁻¹`.
pub fn d_from_delta(delta: &ExpectationMatrix, s: &Matrix) -> Result<DensityMatrix> {
    let s_inv = linalg::inverse_spd(s)?;
    Ok(DensityMatrix(linalg::symmetrize(
        &(&s_inv * delta.matrix() * &s_inv),
    )))
}

/// `‖D S D − D‖_max`
pub fn idempotency_residual(d: &Matrix, s: &Matrix) -> f64 {
    linalg::max_abs_diff(&(d * s * d), d)
}

/// Residuals of the single-determinant conditions in both the `D` form
/// (`Dᵀ = D`, `Tr(DS) = N`, `DSD = D`) and the `Δ` form
/// (`Δᵀ = Δ`, `Tr(ΔS⁻¹) = N`, `ΔS⁻¹Δ = Δ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConditions {
    pub symmetry: f64,
    pub trace_error: f64,
    pub idempotency: f64,
    pub delta_symmetry: f64,
    pub delta_trace_error: f64,
    pub delta_idempotency: f64,
}

impl DensityConditions {
    pub fn d_form_max(&self) -> f64 {
        self.symmetry.max(self.trace_error).max(self.idempotency)
    }

    pub fn delta_form_max(&self) -> f64 {
        self.delta_symmetry
            .max(self.delta_trace_error)
            .max(self.delta_idempotency)
    }

    pub fn max_residual(&self) -> f64 {
        self.d_form_max().max(self.delta_form_max())
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Diagnostic only; works on raw matrices so non-symmetric input can be reported.
pub fn check_density_conditions(
    d: &Matrix,
    s: &Matrix,
    n_electrons: usize,
) -> Result<DensityConditions> {
    let n = n_electrons as f64;
    let s_inv = linalg::inverse_spd(s)?;
    // Δ = Sᵀ Dᵀ Sᵀ, kept literal so an asymmetric D shows up in Δ too.
    let delta = s.transpose() * d.transpose() * s.transpose();
    Ok(DensityConditions {
        symmetry: linalg::asymmetry(d),
        trace_error: ((d * s).trace() - n).abs(),
        idempotency: idempotency_residual(d, s),
        delta_symmetry: linalg::asymmetry(&delta),
        delta_trace_error: ((&delta * &s_inv).trace() - n).abs(),
        delta_idempotency: linalg::max_abs_diff(&(&delta * &s_inv * &delta), &delta),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Purified {
    pub density: DensityMatrix,
    pub iterations: usize,
    pub residual: f64,
    /// `Tr(D S)` after minus before.
    pub trace_drift: f64,
}

/// McWeeny purification in the S metric: `D ← 3 DSD − 2 DSDSD`.
pub fn purify(d: &DensityMatrix, s: &Matrix) -> Result<Purified> {
    let start_trace = (d.matrix() * s).trace();
    let mut current = d.matrix().clone();
    let mut residual = idempotency_residual(&current, s);
    if residual > PURIFY_MAX_START_RESIDUAL || !residual.is_finite() {
        return Err(Error::PurificationFailed {
            iterations: 0,
            residual,
        });
    }
    let mut iterations = 0;
    while residual >= PURIFY_TARGET {
        if iterations == PURIFY_MAX_ITERATIONS {
            return Err(Error::PurificationFailed {
                iterations,
                residual,
            });
        }
        let ds = &current * s;
        let dsd = &ds * &current;
        let dsdsd = &ds * &dsd;
        current = linalg::symmetrize(&(dsd * 3.0 - dsdsd * 2.0));
        residual = idempotency_residual(&current, s);
        iterations += 1;
    }
    let trace_drift = (&current * s).trace() - start_trace;
    Ok(Purified {
        density: DensityMatrix(current),
        iterations,
        residual,
        trace_drift,
    })
}

/// S-orthonormal basis `C_occ` (M × N) of the occupied space of `D`.
///
/// Uses the orthonormal-frame projector `S^{1/2} D S^{1/2}`, whose `N` largest
/// eigenvectors span the occupied space; `C_occ = S^{-1/2} U_occ`.
pub fn occupied_coefficients(d: &DensityMatrix, s: &Matrix, n_occupied: usize) -> Result<Matrix> {
    let m = d.order();
    if n_occupied > m {
        return Err(Error::InvalidSystem(format!(
            "cannot occupy {n_occupied} of {m} orbitals"
        )));
    }
    let frames = complementary_frames(d, s)?;
    Ok(frames.columns(m - n_occupied, n_occupied).into_owned())
}

/// All `M` S-orthonormal orbitals ordered by occupation (virtual first,
/// occupied last), from the eigenvectors of `S^{1/2} D S^{1/2}`.
pub(crate) fn complementary_frames(d: &DensityMatrix, s: &Matrix) -> Result<Matrix> {
    let root = linalg::sqrt_spd(s)?;
    let inv_root = linalg::inverse_sqrt(s)?;
    let projector = linalg::symmetrize(&(&root * d.matrix() * &root));
    let eig = linalg::sym_eig(&projector)?;
    Ok(inv_root * eig.vectors)
}
