use super::density::DensityMatrix;
use crate::integrals::TwoElectronTensor;
use crate::linalg::{self, Matrix};

/// Fock matrix `F = h + G(D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix(Matrix);

impl FockMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Wraps an arbitrary matrix, symmetrising it.
    pub fn from_matrix(m: Matrix) -> Self {
        Self(linalg::symmetrize(&m))
    }
}

/// Coulomb-exchange matrix `G_{μν} = Σ_{λσ} D_{λσ} [(μν|λσ) − (μσ|λν)]`.
///
/// Plain O(M⁴) contraction in a fixed summation order, no integral-symmetry
/// shortcuts. Accepts any square `D`, not only densities, since the trace
/// pairing `Tr(G(A) B) = Tr(G(B) A)` is used with general matrices.
pub fn build_g(d: &Matrix, g: &TwoElectronTensor) -> Matrix {
    let m = d.nrows();
    debug_assert_eq!(g.order(), m);
    let mut out = Matrix::zeros(m, m);
    for mu in 0..m {
        for nu in 0..m {
            let mut acc = 0.0;
            for lam in 0..m {
                for sig in 0..m {
                    let dls = d[(lam, sig)];
                    if dls != 0.0 {
                        acc += dls * (g.get(mu, nu, lam, sig) - g.get(mu, sig, lam, nu));
                    }
                }
            }
            out[(mu, nu)] = acc;
        }
    }
    out
}

pub fn build_fock(d: &DensityMatrix, h: &Matrix, g: &TwoElectronTensor) -> FockMatrix {
    FockMatrix::from_matrix(h + build_g(d.matrix(), g))
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `E = Tr(h D) + ½ Tr(G(D) D) + shift`.
pub fn energy(d: &DensityMatrix, h: &Matrix, g: &TwoElectronTensor, energy_shift: f64) -> f64 {
    let gm = build_g(d.matrix(), g);
    trace_product(h, d.matrix()) + 0.5 * trace_product(&gm, d.matrix()) + energy_shift
}

/// Energy and Fock matrix from one `G` build.
pub fn energy_and_fock(
    d: &DensityMatrix,
    h: &Matrix,
    g: &TwoElectronTensor,
    energy_shift: f64,
) -> (f64, FockMatrix) {
    let gm = build_g(d.matrix(), g);
    let e = trace_product(h, d.matrix()) + 0.5 * trace_product(&gm, d.matrix()) + energy_shift;
    (e, FockMatrix::from_matrix(h + gm))
}

/// Orbital-rotation gradient `S D F − F D S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// Antisymmetrised; `∂E/∂X_{μν} = matrix[(ν, μ)]` for `D̃ = exp(XS) D exp(−SX)`.
    pub matrix: Matrix,
    /// Largest entry of the symmetric part removed by antisymmetrisation.
    pub symmetric_residue: f64,
}

impl Gradient {
    pub fn max_norm(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }
}

pub fn gradient(d: &DensityMatrix, f: &FockMatrix, s: &Matrix) -> Gradient {
    let sdf = s * d.matrix() * f.matrix();
    let fds = f.matrix() * d.matrix() * s;
    let raw = sdf - fds;
    let sym = linalg::max_abs(&linalg::symmetrize(&raw));
    Gradient {
        matrix: linalg::antisymmetrize(&raw),
        symmetric_residue: sym,
    }
}
