use crate::error::Result;
use crate::hf::{DensityMatrix, FockMatrix};
use crate::linalg::{self, Matrix};

/// Augmented DIIS matrices above this condition number are not trusted.
pub const DIIS_MAX_CONDITION: f64 = 1e12;

/// Orthonormalised stationarity residual `S^{-1/2} (FDS − SDF) S^{-1/2}`.
pub fn diis_error(f: &FockMatrix, d: &DensityMatrix, s: &Matrix, s_inv_sqrt: &Matrix) -> Matrix {
    let fds = f.matrix() * d.matrix() * s;
    let sdf = s * d.matrix() * f.matrix();
    s_inv_sqrt * (fds - sdf) * s_inv_sqrt
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiisExtrapolation {
    pub fock: FockMatrix,
    /// Number of history entries that entered the extrapolation.
    pub dimension: usize,
    pub coefficients: Vec<f64>,
}

/// Pulay extrapolation over `(F_i, e_i)` pairs, oldest first.
///
/// Minimises `‖Σ c_i e_i‖` subject to `Σ c_i = 1`. If the bordered system is
/// ill-conditioned the oldest entries are dropped one at a time; with a single
/// entry left this is the plain latest `F`.
pub fn diis_extrapolate(history: &[(FockMatrix, Matrix)]) -> Result<DiisExtrapolation> {
    assert!(!history.is_empty(), "DIIS history must not be empty");
    for start in 0..history.len() {
        let window = &history[start..];
        if let Some(coefficients) = solve_weights(window)? {
            let m = window[0].0.matrix().nrows();
            let mut f = Matrix::zeros(m, m);
            for ((fi, _), c) in window.iter().zip(&coefficients) {
                f += fi.matrix() * *c;
            }
            return Ok(DiisExtrapolation {
                fock: FockMatrix::from_matrix(f),
                dimension: window.len(),
                coefficients,
            });
        }
    }
    unreachable!("a single-entry window is always well-conditioned")
}

fn solve_weights(window: &[(FockMatrix, Matrix)]) -> Result<Option<Vec<f64>>> {
    let n = window.len();
    if n == 1 {
        return Ok(Some(vec![1.0]));
    }
    let mut b = Matrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..=i {
            let v = window[i].1.dot(&window[j].1);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let scale = (0..n).map(|i| b[(i, i)]).fold(0.0, f64::max);
    if scale > 0.0 {
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] /= scale;
            }
        }
    }
    for i in 0..n {
        b[(i, n)] = -1.0;
        b[(n, i)] = -1.0;
    }
    let eig = linalg::sym_eig(&b)?;
    let smallest = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let largest = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if smallest == 0.0 || largest / smallest > DIIS_MAX_CONDITION {
        return Ok(None);
    }
    // rhs = (0, …, 0, −1)
    let mut x = vec![0.0; n + 1];
    for (k, &lambda) in eig.values.iter().enumerate() {
        let proj = -eig.vectors[(n, k)] / lambda;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += eig.vectors[(i, k)] * proj;
        }
    }
    x.truncate(n);
    Ok(Some(x))
}
