//! Metric-preserving exponential transformations of the density.
//!
//! The generator is a real antisymmetric `X`; it plays the role of `iκ` for a
//! real symmetric `κ`, so `D̃ = exp(XS) D exp(−SX)` is the real counterpart of
//! `exp(iκS) D exp(−iSκ)`. Because `exp(−SX) = exp(XS)ᵀ` for antisymmetric `X`,
//! the transform is evaluated as `U D Uᵀ` with `U = exp(XS)`.
//!
//! For finite steps the redundancy projection is applied to the step direction
//! before exponentiation.

use super::density::{idempotency_residual, DensityMatrix, IDEMPOTENCY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Real antisymmetric rotation generator.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalRotation(Matrix);

impl OrbitalRotation {
    pub fn zeros(m: usize) -> Self {
        Self(Matrix::zeros(m, m))
    }

    /// Accepts a matrix that is antisymmetric up to round-off and stores its
    /// exactly antisymmetric part.
    pub fn new(x: Matrix) -> Result<Self> {
        linalg::ensure_square(&x)?;
        let sym = linalg::max_abs(&linalg::symmetrize(&x));
        if sym > linalg::SYMMETRY_TOL * linalg::max_abs(&x).max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: sym });
        }
        Ok(Self(linalg::antisymmetrize(&x)))
    }

    /// `(A − Aᵀ) / 2` of an arbitrary square matrix.
    pub fn antisymmetric_part(a: &Matrix) -> Self {
        Self(linalg::antisymmetrize(a))
    }

    pub fn generator(&self) -> &Matrix {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }
}

impl std::ops::Sub for &OrbitalRotation {
    type Output = OrbitalRotation;

    fn sub(self, rhs: Self) -> OrbitalRotation {
        OrbitalRotation(&self.0 - &rhs.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedRotation {
    pub rotation: OrbitalRotation,
    /// Set when `D` was not idempotent within tolerance; holds `‖DSD − D‖_max`.
    pub idempotency_warning: Option<f64>,
}

/// `P(X) = P X Qᵀ + Q X Pᵀ` with `P = DS`, `Q = I − DS`: keeps only the
/// occupied–virtual and virtual–occupied blocks.
///
/// Works on any square matrix; an antisymmetric input gives an antisymmetric
/// output.
pub fn project_rotation(x: &Matrix, d: &DensityMatrix, s: &Matrix) -> ProjectedRotation {
    let m = x.nrows();
    let p = d.matrix() * s;
    let q = Matrix::identity(m, m) - &p;
    let pxq = &p * x * q.transpose();
    let qxp = &q * x * p.transpose();
    let residual = idempotency_residual(d.matrix(), s);
    ProjectedRotation {
        rotation: OrbitalRotation::antisymmetric_part(&(pxq + qxp)),
        idempotency_warning: (residual > IDEMPOTENCY_TOL).then_some(residual),
    }
}

/// Projection applied to a generator (convenience wrapper).
pub fn project(x: &OrbitalRotation, d: &DensityMatrix, s: &Matrix) -> OrbitalRotation {
    project_rotation(x.generator(), d, s).rotation
}

/// Residual of the adjoint projection identity `Qᵀ G P + Pᵀ G Q = G`
/// satisfied by the orbital gradient at an idempotent `D`.
pub fn gradient_self_projection_residual(grad: &Matrix, d: &DensityMatrix, s: &Matrix) -> f64 {
    let m = grad.nrows();
    let p = d.matrix() * s;
    let q = Matrix::identity(m, m) - &p;
    let projected = q.transpose() * grad * &p + p.transpose() * grad * &q;
    linalg::max_abs_diff(&projected, grad)
}

/// `D̃ = exp(XS) D exp(−SX)`.
pub fn transform_density(
    d: &DensityMatrix,
    x: &OrbitalRotation,
    s: &Matrix,
) -> Result<DensityMatrix> {
    let u = linalg::matrix_exp(&(x.generator() * s))?;
    DensityMatrix::new(linalg::symmetrize(&(&u * d.matrix() * u.transpose())))
}
