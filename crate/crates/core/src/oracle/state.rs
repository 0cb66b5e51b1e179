use super::{Complex, ComplexMatrix, ComplexVector, FockSpaceRep, IMAGINARY_TOL};
use crate::error::{Error, Result};
use crate::hf::ExpectationMatrix;
use crate::linalg::{self, Matrix};

/// Determinant coefficients must satisfy `Cᵀ S C = I` to this tolerance.
pub const GRAM_TOL: f64 = 1e-10;

/// Amplitudes on the occupation basis of the orthonormal modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    pub amplitudes: ComplexVector,
}

impl ManyBodyState {
    pub fn vacuum(dimension: usize) -> Self {
        let mut amplitudes = ComplexVector::zeros(dimension);
        amplitudes[0] = Complex::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: ComplexVector) -> Self {
        let norm = amplitudes.norm();
        Self {
            amplitudes: amplitudes.unscale(norm),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &ManyBodyState) -> Complex {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// `ã†_1 ã†_2 ⋯ ã†_N |vac⟩` with `ã†_i = Σ_μ C_{μi} a†_μ`.
pub fn determinant_state(rep: &FockSpaceRep, c_occ: &Matrix) -> Result<ManyBodyState> {
    let m = rep.modes();
    if c_occ.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: c_occ.nrows(),
        });
    }
    let n = c_occ.ncols();
    let gram = c_occ.transpose() * rep.metric() * c_occ;
    let residual = linalg::max_abs_diff(&gram, &Matrix::identity(n, n));
    if residual > GRAM_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    let mut psi = ManyBodyState::vacuum(rep.dimension()).amplitudes;
    for i in (0..n).rev() {
        let mut next = ComplexVector::zeros(psi.len());
        for mu in 0..m {
            let c = c_occ[(mu, i)];
            if c != 0.0 {
                next += (rep.create(mu) * &psi) * Complex::new(c, 0.0);
            }
        }
        psi = next;
    }
    Ok(ManyBodyState { amplitudes: psi })
}

fn annihilated(rep: &FockSpaceRep, state: &ManyBodyState) -> Vec<ComplexVector> {
    (0..rep.modes())
        .map(|nu| rep.annihilate(nu) * &state.amplitudes)
        .collect()
}

/// `Δ_{μν} = ⟨a†_μ a_ν⟩ = ⟨a_μ ψ | a_ν ψ⟩`, complex.
pub fn expectation_delta_complex(rep: &FockSpaceRep, state: &ManyBodyState) -> ComplexMatrix {
    let phi = annihilated(rep, state);
    let m = rep.modes();
    ComplexMatrix::from_fn(m, m, |mu, nu| phi[mu].dotc(&phi[nu]))
}

/// Real part of [`expectation_delta_complex`] after checking that the
/// imaginary part is round-off.
pub fn expectation_delta(rep: &FockSpaceRep, state: &ManyBodyState) -> Result<ExpectationMatrix> {
    let delta = expectation_delta_complex(rep, state);
    ExpectationMatrix::new(real_part(&delta)?)
}

/// Splits off the real part, refusing an imaginary residue above round-off.
pub fn real_part(a: &ComplexMatrix) -> Result<Matrix> {
    let residue = a.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    if residue > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(a.map(|z| z.re))
}

/// Dense real rank-4 tensor indexed `[μ, ν, λ, σ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    order: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order.pow(4)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn offset(&self, [a, b, c, d]: [usize; 4]) -> usize {
        ((a * self.order + b) * self.order + c) * self.order + d
    }

    pub fn get(&self, idx: [usize; 4]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 4], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `Γ_{μνλσ} = ⟨a†_μ a†_λ a_σ a_ν⟩ = ⟨a_λ a_μ ψ | a_σ a_ν ψ⟩`.
pub fn expectation_gamma(rep: &FockSpaceRep, state: &ManyBodyState) -> Result<Tensor4> {
    let m = rep.modes();
    let phi = annihilated(rep, state);
    // pairs[λ * m + μ] = a_λ a_μ ψ
    let pairs: Vec<ComplexVector> = (0..m)
        .flat_map(|lambda| phi.iter().map(move |p| (lambda, p)))
        .map(|(lambda, p)| rep.annihilate(lambda) * p)
        .collect();
    let mut gamma = Tensor4::zeros(m);
    let mut residue = 0.0_f64;
    for mu in 0..m {
        for nu in 0..m {
            for lambda in 0..m {
                for sigma in 0..m {
                    let z = pairs[lambda * m + mu].dotc(&pairs[sigma * m + nu]);
                    residue = residue.max(z.im.abs());
                    gamma.set([mu, nu, lambda, sigma], z.re);
                }
            }
        }
    }
    if residue > IMAGINARY_TOL {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(gamma)
}

/// `max |Γ_{μνλσ} − (Δ_{μν} Δ_{λσ} − Δ_{μσ} Δ_{λν})|`.
pub fn verify_wick(gamma: &Tensor4, delta: &Matrix) -> f64 {
    let m = gamma.order();
    assert_eq!(m, delta.nrows(), "Γ and Δ must share the basis size");
    let mut worst = 0.0_f64;
    for mu in 0..m {
        for nu in 0..m {
            for lambda in 0..m {
                for sigma in 0..m {
                    let wick = delta[(mu, nu)] * delta[(lambda, sigma)]
                        - delta[(mu, sigma)] * delta[(lambda, nu)];
                    worst = worst.max((gamma.get([mu, nu, lambda, sigma]) - wick).abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::{delta_from_d, DensityMatrix};
    use crate::integrals::{random_occupied_coefficients, random_system};
    use crate::oracle::build_ao_operators;

    fn setup(m: usize, n: usize, seed: u64) -> (FockSpaceRep, Matrix, Matrix) {
        let sys = random_system(m, n, seed, 0.6).unwrap();
        let c = random_occupied_coefficients(&sys.metric, n, seed + 100).unwrap();
        (build_ao_operators(&sys.metric).unwrap(), sys.metric, c)
    }

    #[test]
    fn empty_determinant_is_vacuum() {
        let (rep, _, _) = setup(3, 0, 1);
        let psi = determinant_state(&rep, &Matrix::zeros(3, 0)).unwrap();
        assert_eq!(psi, ManyBodyState::vacuum(8));
        assert_eq!(
            expectation_delta(&rep, &psi).unwrap().matrix(),
            &Matrix::zeros(3, 3)
        );
        let gamma = expectation_gamma(&rep, &psi).unwrap();
        assert_eq!(gamma.max_abs(), 0.0);
        assert_eq!(verify_wick(&gamma, &Matrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn orthonormal_basis_gives_single_bitstring() {
        let rep = build_ao_operators(&Matrix::identity(4, 4)).unwrap();
        let c = Matrix::identity(4, 4).columns(0, 2).into_owned();
        let psi = determinant_state(&rep, &c).unwrap();
        let nonzero: Vec<_> = psi
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, 0b0011);
        let delta = expectation_delta(&rep, &psi).unwrap();
        let expected =
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
        assert_eq!(delta.matrix(), &expected);
    }

    #[test]
    fn non_orthonormal_coefficients_are_rejected() {
        let (rep, _, _) = setup(3, 1, 2);
        let c = Matrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!(matches!(
            determinant_state(&rep, &c),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn delta_is_sds() {
        for seed in 0..30 {
            let m = 2 + (seed as usize % 5);
            let n = seed as usize % (m + 1);
            let (rep, s, c) = setup(m, n, seed);
            let psi = determinant_state(&rep, &c).unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-10);
            let delta = expectation_delta(&rep, &psi).unwrap();
            let expected = delta_from_d(&DensityMatrix::from_coefficients(&c), &s);
            assert!(linalg::max_abs_diff(delta.matrix(), expected.matrix()) < 1e-10);
        }
    }

    #[test]
    fn wick_holds_for_determinants_only() {
        let (rep, _, c) = setup(5, 2, 9);
        let psi = determinant_state(&rep, &c).unwrap();
        let delta = expectation_delta(&rep, &psi).unwrap();
        let gamma = expectation_gamma(&rep, &psi).unwrap();
        assert!(verify_wick(&gamma, delta.matrix()) < 1e-10);

        let (rep1, _, c1) = setup(4, 1, 3);
        let psi1 = determinant_state(&rep1, &c1).unwrap();
        assert!(expectation_gamma(&rep1, &psi1).unwrap().max_abs() < 1e-14);

        let rep = build_ao_operators(&Matrix::identity(4, 4)).unwrap();
        let mut amp = ComplexVector::zeros(16);
        amp[0b0011] = Complex::new(1.0, 0.0);
        amp[0b1100] = Complex::new(1.0, 0.0);
        let cat = ManyBodyState::normalized(amp);
        let delta = expectation_delta(&rep, &cat).unwrap();
        let gamma = expectation_gamma(&rep, &cat).unwrap();
        assert!(verify_wick(&gamma, delta.matrix()) > 0.1);
    }
}
