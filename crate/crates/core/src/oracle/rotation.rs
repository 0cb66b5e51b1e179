use serde::Serialize;

use super::state::{determinant_state, expectation_delta, ManyBodyState};
use super::{Complex, ComplexMatrix, ComplexVector, FockSpaceRep};
use crate::error::{Error, Result};
use crate::hf::{occupied_coefficients, transform_density, DensityMatrix, OrbitalRotation};
use crate::linalg::{self, Matrix};

/// A generator is Hermitian when `‖κ − κ†‖_max` is below this.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest norm bound of `K̂` handled in one Taylor substep.
const SUBSTEP_NORM: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 60;

fn one_norm(a: &ComplexMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Complex matrix exponential by scaling, 18-term Taylor series and squaring.
/// Kept separate from the real `linalg::matrix_exp` so the oracle shares no
/// numerical code with what it checks.
pub fn complex_expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > SUBSTEP_NORM {
        (norm / SUBSTEP_NORM).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.unscale(2f64.powi(squarings as i32));
    let mut result = ComplexMatrix::identity(n, n);
    for k in (1..=18).rev() {
        result = ComplexMatrix::identity(n, n) + (&scaled * result).unscale(k as f64);
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn hermitian_residual(kappa: &ComplexMatrix) -> f64 {
    (kappa - kappa.adjoint())
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// `K̂ψ = Σ_μ a†_μ (Σ_ν κ_{μν} a_ν ψ)`.
fn apply_one_body(rep: &FockSpaceRep, kappa: &ComplexMatrix, psi: &ComplexVector) -> ComplexVector {
    let m = rep.modes();
    let phi: Vec<ComplexVector> = (0..m).map(|nu| rep.annihilate(nu) * psi).collect();
    let mut out = ComplexVector::zeros(psi.len());
    for mu in 0..m {
        let mut chi = ComplexVector::zeros(psi.len());
        for (nu, p) in phi.iter().enumerate() {
            let k = kappa[(mu, nu)];
            if k != Complex::new(0.0, 0.0) {
                chi.axpy(k, p, Complex::new(1.0, 0.0));
            }
        }
        out += rep.create(mu) * &chi;
    }
    out
}

/// `exp(iK̂)|ψ⟩` with `K̂ = Σ κ_{μν} a†_μ a_ν` for Hermitian `κ`.
///
/// The exponential acts on the vector through a Taylor series, split into
/// substeps so that each one has `‖K̂‖ ≤ 0.5`. The bound used is
/// `Σ |κ_{μν}| (S_{μμ} S_{νν})^{1/2}`, since `‖a_μ‖ = S_{μμ}^{1/2}`.
pub fn apply_kappa_rotation(
    rep: &FockSpaceRep,
    state: &ManyBodyState,
    kappa: &ComplexMatrix,
) -> Result<ManyBodyState> {
    let m = rep.modes();
    if kappa.nrows() != m || kappa.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: kappa.nrows(),
        });
    }
    let asymmetry = hermitian_residual(kappa);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let s = rep.metric();
    let mut bound = 0.0;
    for mu in 0..m {
        for nu in 0..m {
            bound += kappa[(mu, nu)].norm() * (s[(mu, mu)] * s[(nu, nu)]).sqrt();
        }
    }
    let substeps = ((bound / SUBSTEP_NORM).ceil() as usize).max(1);
    let factor = Complex::new(0.0, 1.0 / substeps as f64);

    let mut psi = state.amplitudes.clone();
    for _ in 0..substeps {
        let mut term = psi.clone();
        let mut sum = psi.clone();
        for k in 1..=TAYLOR_MAX_TERMS {
            term = apply_one_body(rep, kappa, &term) * (factor / k as f64);
            sum += &term;
            if term.norm() <= f64::EPSILON * 1e-3 * sum.norm() {
                break;
            }
        }
        psi = sum;
    }
    Ok(ManyBodyState { amplitudes: psi })
}

/// Real symmetric `κ`, promoted to complex.
pub fn apply_real_kappa_rotation(
    rep: &FockSpaceRep,
    state: &ManyBodyState,
    kappa: &Matrix,
) -> Result<ManyBodyState> {
    apply_kappa_rotation(rep, state, &to_complex(kappa))
}

pub fn to_complex(a: &Matrix) -> ComplexMatrix {
    a.map(|x| Complex::new(x, 0.0))
}

/// `Δ̃ = exp(−i S κᵀ) Δ exp(i κᵀ S)`, the image of `Δ` under `exp(iK̂)`.
pub fn delta_transform_reference(
    delta: &ComplexMatrix,
    kappa: &ComplexMatrix,
    s: &Matrix,
) -> ComplexMatrix {
    let s = to_complex(s);
    let kt = kappa.transpose();
    let i = Complex::new(0.0, 1.0);
    let left = complex_expm(&(&s * &kt * -i));
    let right = complex_expm(&(&kt * &s * i));
    left * delta * right
}

/// Agreement between the Fock-space rotation and the real density transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformConsistency {
    /// `‖S⁻¹Δ̃S⁻¹ − exp(XS) D exp(−SX)‖_max`.
    pub max_deviation: f64,
    /// `|‖exp(iK̂)ψ‖ − 1|`.
    pub norm_error: f64,
}

/// Rotates the determinant of `D` by `exp(iK̂)` with `κ = −iX`, reads back
/// `D̃ = S⁻¹Δ̃S⁻¹` and compares it with [`transform_density`].
pub fn verify_transform_consistency(
    d: &DensityMatrix,
    x: &OrbitalRotation,
    s: &Matrix,
    rep: &FockSpaceRep,
) -> Result<TransformConsistency> {
    let n = (d.matrix() * s).trace().round().max(0.0) as usize;
    let c_occ = occupied_coefficients(d, s, n)?;
    let psi = determinant_state(rep, &c_occ)?;
    let kappa = x.generator().map(|v| Complex::new(0.0, -v));
    let rotated = apply_kappa_rotation(rep, &psi, &kappa)?;
    let delta = expectation_delta(rep, &rotated)?;
    let s_inv = linalg::inverse_spd(s)?;
    let d_oracle = &s_inv * delta.matrix() * &s_inv;
    let d_core = transform_density(d, x, s)?;
    Ok(TransformConsistency {
        max_deviation: linalg::max_abs_diff(&d_oracle, d_core.matrix()),
        norm_error: (rotated.norm() - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::project_rotation;
    use crate::integrals::{random_occupied_coefficients, random_system};
    use crate::oracle::{build_ao_operators, expectation_delta_complex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(m: usize, seed: u64, frobenius: f64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
        let sym = linalg::symmetrize(&a);
        let norm = sym.norm();
        sym * (frobenius / norm)
    }

    fn setup(m: usize, n: usize, seed: u64) -> (FockSpaceRep, Matrix, Matrix) {
        let sys = random_system(m, n, seed, 0.6).unwrap();
        let c = random_occupied_coefficients(&sys.metric, n, seed + 50).unwrap();
        (build_ao_operators(&sys.metric).unwrap(), sys.metric, c)
    }

    #[test]
    fn complex_expm_of_diagonal_and_rotation() {
        let i = Complex::new(0.0, 1.0);
        let a = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            i * 3.0,
            Complex::new(-1.0, 0.0),
        ]));
        let e = complex_expm(&a);
        assert!((e[(0, 0)] - (i * 3.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - Complex::new((-1.0f64).exp(), 0.0)).norm() < 1e-15);
        let theta = 2.5;
        let gen = ComplexMatrix::from_row_slice(
            2,
            2,
            &[0.0.into(), (-theta).into(), theta.into(), 0.0.into()],
        );
        let r = complex_expm(&gen);
        assert!((r[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((r[(1, 0)].re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn zero_kappa_is_identity() {
        let (rep, _, c) = setup(4, 2, 1);
        let psi = determinant_state(&rep, &c).unwrap();
        let out = apply_real_kappa_rotation(&rep, &psi, &Matrix::zeros(4, 4)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn rotation_is_unitary() {
        for seed in 0..5 {
            let (rep, _, c) = setup(4, 2, seed);
            let psi = determinant_state(&rep, &c).unwrap();
            let kappa = random_symmetric(4, seed + 10, 2.0);
            let out = apply_real_kappa_rotation(&rep, &psi, &kappa).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn action_matches_dense_exponential() {
        let (rep, _, c) = setup(4, 2, 3);
        let psi = determinant_state(&rep, &c).unwrap();
        let kappa = to_complex(&random_symmetric(4, 4, 1.5));
        let op = rep.one_body_operator(&kappa);
        let mut dense = ComplexMatrix::zeros(16, 16);
        for (r, col, v) in op.triplet_iter() {
            dense[(r, col)] += *v * Complex::new(0.0, 1.0);
        }
        let expected = complex_expm(&dense) * &psi.amplitudes;
        let got = apply_kappa_rotation(&rep, &psi, &kappa).unwrap();
        assert!((expected - got.amplitudes).norm() < 1e-12);
    }

    #[test]
    fn delta_transformation_law() {
        for seed in 0..5 {
            let (rep, s, c) = setup(4, 2, seed);
            let psi = determinant_state(&rep, &c).unwrap();
            let kappa = to_complex(&random_symmetric(4, seed + 20, 2.0));
            let out = apply_kappa_rotation(&rep, &psi, &kappa).unwrap();
            let delta = expectation_delta_complex(&rep, &psi);
            let oracle = expectation_delta_complex(&rep, &out);
            let reference = delta_transform_reference(&delta, &kappa, &s);
            let diff = (oracle - reference)
                .iter()
                .fold(0.0_f64, |m, z| m.max(z.norm()));
            assert!(diff < 1e-10, "seed {seed}: {diff:e}");
        }
    }

    #[test]
    fn non_hermitian_kappa_is_rejected() {
        let (rep, _, c) = setup(3, 1, 2);
        let psi = determinant_state(&rep, &c).unwrap();
        let k = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(apply_real_kappa_rotation(&rep, &psi, &k).is_err());
    }

    #[test]
    fn consistent_with_real_transform() {
        for seed in 0..5 {
            let (rep, s, c) = setup(4, 2, seed);
            let d = DensityMatrix::from_coefficients(&c);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 30);
            let a = Matrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
            let mut x = OrbitalRotation::antisymmetric_part(&a);
            let scale = (x.generator() * &s).norm();
            x = x.scaled(1.0 / scale.max(1.0));
            let zero =
                verify_transform_consistency(&d, &OrbitalRotation::zeros(4), &s, &rep).unwrap();
            assert!(zero.max_deviation < 1e-12);
            let r = verify_transform_consistency(&d, &x, &s, &rep).unwrap();
            assert!(r.max_deviation < 1e-9, "seed {seed}: {r:?}");
            assert!(r.norm_error < 1e-10);

            let redundant = &x - &project_rotation(x.generator(), &d, &s).rotation;
            let r = verify_transform_consistency(&d, &redundant, &s, &rep).unwrap();
            let d_oracle_vs_d = r.max_deviation
                + linalg::max_abs_diff(
                    transform_density(&d, &redundant, &s).unwrap().matrix(),
                    d.matrix(),
                );
            assert!(d_oracle_vs_d < 1e-9);
        }
    }
}
