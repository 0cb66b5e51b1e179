//! Dense real linear-algebra kernels.
//!
//! Everything here works on [`Matrix`] (a dense `f64` matrix) and is sized for
//! desk-scale problems (M up to roughly 64). Symmetric eigenproblems use cyclic
//! Jacobi rotations; the generalized problem `F c = λ S c` is reduced by the
//! congruence `S^{-1/2} F S^{-1/2}` so the reduced matrix stays symmetric.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative tolerance used when deciding whether an input is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Smallest admissible ratio λ_min / λ_max of a metric.
pub const LINEAR_DEPENDENCE_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;
const EXP_TAYLOR_TERMS: usize = 18;
const EXP_SCALE_TARGET: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub max_abs: f64,
}

pub fn norms(a: &Matrix) -> Norms {
    Norms {
        frobenius: a.iter().map(|x| x * x).sum::<f64>().sqrt(),
        max_abs: max_abs(a),
    }
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest `|a_ij - a_ji|`.
pub fn asymmetry(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `(A + Aᵀ) / 2`
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// `(A - Aᵀ) / 2`
pub fn antisymmetrize(a: &Matrix) -> Matrix {
    (a - a.transpose()) * 0.5
}

pub fn ensure_square(a: &Matrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(a.nrows())
}

pub fn ensure_symmetric(a: &Matrix) -> Result<usize> {
    let n = ensure_square(a)?;
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(n)
}

fn ensure_same_order(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyCheck {
    pub positive_definite: bool,
    /// Lower-triangular `L` with `L Lᵀ = A`, present when positive definite.
    pub factor: Option<Matrix>,
}

/// Cholesky factorisation used as a positive-definiteness test.
pub fn cholesky_spd_check(a: &Matrix) -> Result<CholeskyCheck> {
    let n = ensure_symmetric(a)?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Ok(CholeskyCheck {
                positive_definite: false,
                factor: None,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(CholeskyCheck {
        positive_definite: true,
        factor: Some(l),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: Matrix,
}

/// Full spectrum of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending. Each eigenvector is sign-fixed so that its
/// largest-magnitude component is positive, which keeps results reproducible.
pub fn sym_eig(a: &Matrix) -> Result<EigenDecomposition> {
    let n = ensure_symmetric(a)?;
    let mut w = symmetrize(a);
    let mut v = Matrix::identity(n, n);

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| w[(p, q)].abs())
            .sum();
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = w[(p, p)];
                let aqq = w[(q, q)];
                let g = 100.0 * apq.abs();
                // Negligible off-diagonal entry after the first few sweeps.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[(p, q)] = 0.0;
                    w[(q, p)] = 0.0;
                    continue;
                }
                let diff = aqq - app;
                let t = if diff.abs() + g == diff.abs() {
                    apq / diff
                } else {
                    let theta = 0.5 * diff / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = w[(k, p)];
                    let akq = w[(k, q)];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    w[(k, p)] = new_kp;
                    w[(p, k)] = new_kp;
                    w[(k, q)] = new_kq;
                    w[(q, k)] = new_kq;
                }
                w[(p, p)] = app - t * apq;
                w[(q, q)] = aqq + t * apq;
                w[(p, q)] = 0.0;
                w[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].total_cmp(&w[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| w[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        let mut pivot = 0;
        for k in 1..n {
            if col[k].abs() > col[pivot].abs() {
                pivot = k;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Checked eigendecomposition of a metric: SPD and not nearly linearly dependent.
fn metric_eig(s: &Matrix) -> Result<EigenDecomposition> {
    let eig = sym_eig(s)?;
    let n = eig.values.len();
    if n == 0 {
        return Ok(eig);
    }
    let smallest = eig.values[0];
    let largest = eig.values[n - 1];
    if smallest <= 0.0 {
        return Err(Error::NotPositiveDefinite { smallest });
    }
    if smallest < LINEAR_DEPENDENCE_TOL * largest {
        return Err(Error::LinearDependence { smallest, largest });
    }
    Ok(eig)
}

fn spectral_function(eig: &EigenDecomposition, f: impl Fn(f64) -> f64) -> Matrix {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let fj = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    symmetrize(&(scaled * eig.vectors.transpose()))
}

/// `S^{-1/2}` by eigendecomposition; the result `T` satisfies `T S T = I`.
pub fn inverse_sqrt(s: &Matrix) -> Result<Matrix> {
    let eig = metric_eig(s)?;
    Ok(spectral_function(&eig, |x| 1.0 / x.sqrt()))
}

/// Symmetric square root `S^{1/2}` of a metric.
pub fn sqrt_spd(s: &Matrix) -> Result<Matrix> {
    let eig = metric_eig(s)?;
    Ok(spectral_function(&eig, f64::sqrt))
}

/// `S^{-1}` of a metric, formed spectrally so the result is exactly symmetric.
pub fn inverse_spd(s: &Matrix) -> Result<Matrix> {
    let eig = metric_eig(s)?;
    Ok(spectral_function(&eig, |x| 1.0 / x))
}

/// Solves `F c = λ S c` with `Cᵀ S C = I`, values ascending.
pub fn generalized_eig(f: &Matrix, s: &Matrix) -> Result<EigenDecomposition> {
    ensure_symmetric(f)?;
    ensure_same_order(f, s)?;
    let t = inverse_sqrt(s)?;
    let reduced = symmetrize(&(&t * f * &t));
    let eig = sym_eig(&reduced)?;
    Ok(EigenDecomposition {
        values: eig.values,
        vectors: t * eig.vectors,
    })
}

/// Maximum absolute column sum.
fn one_norm(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` for a general real square matrix, by scaling and squaring a
/// truncated Taylor series.
pub fn matrix_exp(a: &Matrix) -> Result<Matrix> {
    let n = ensure_square(a)?;
    let norm = one_norm(a);
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > EXP_SCALE_TARGET {
        squarings += 1;
    }
    let scaled = a / 2f64.powi(squarings as i32);

    // Horner: I + A(I + A/2(I + A/3(...)))
    let identity = Matrix::identity(n, n);
    let mut acc = identity.clone();
    for k in (1..=EXP_TAYLOR_TERMS).rev() {
        acc = &identity + (&scaled * acc) / k as f64;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    Ok(acc)
}
