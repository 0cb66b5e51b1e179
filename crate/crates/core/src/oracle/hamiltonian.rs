use super::operators::{annihilate_bit, check_cap, create_bit};
use super::state::ManyBodyState;
use super::{Complex, ComplexMatrix, FockSpaceRep, IMAGINARY_TOL, MAX_MODES_TWO_BODY};
use crate::error::{Error, Result};
use crate::integrals::AoSystem;
use crate::linalg::{self, Matrix};

/// Bytes of a dense complex matrix on the `2^m` space.
fn dense_bytes(m: usize) -> u128 {
    (1u128 << (2 * m)) * 16
}

/// Applies `t` to every index of a 4-index array stored row-major:
/// `out_{pqrs} = Σ t_{αp} t_{βq} t_{γr} t_{δs} x_{αβγδ}`.
fn transform_four(x: &[f64], t: &Matrix) -> Vec<f64> {
    let m = t.nrows();
    let mut cur = x.to_vec();
    // One index at a time, rotating the transformed index to the back.
    for _ in 0..4 {
        let mut next = vec![0.0; cur.len()];
        let stride = m * m * m;
        for a in 0..m {
            for rest in 0..stride {
                let v = cur[a * stride + rest];
                if v == 0.0 {
                    continue;
                }
                for p in 0..m {
                    next[rest * m + p] += t[(a, p)] * v;
                }
            }
        }
        cur = next;
    }
    cur
}

/// The nonorthogonal Hamiltonian
/// `Ĥ₀ = Σ (S⁻¹hS⁻¹)_{μν} a†_μ a_ν + ½ Σ B_{μνκτ} a†_μ a†_κ a_τ a_ν`,
/// where `B` is `g` with `S⁻¹` applied to every index, as an explicit matrix.
///
/// Substituting `a†_μ = Σ_p V_{μp} b†_p` turns both sums into mode-basis
/// strings, which are applied bitwise to each basis state.
pub fn build_h0(rep: &FockSpaceRep, system: &AoSystem) -> Result<ComplexMatrix> {
    let m = rep.modes();
    check_cap(m, MAX_MODES_TWO_BODY, dense_bytes(m))?;
    if system.n_spin_orbitals() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: system.n_spin_orbitals(),
        });
    }
    let s_inv = linalg::inverse_spd(rep.metric())?;
    let v = rep.mixing();
    let one_body = v.transpose() * (&s_inv * &system.core_h * &s_inv) * v;

    let mut g = vec![0.0; m.pow(4)];
    for mu in 0..m {
        for nu in 0..m {
            for ka in 0..m {
                for ta in 0..m {
                    g[((mu * m + nu) * m + ka) * m + ta] = system.two_electron.get(mu, nu, ka, ta);
                }
            }
        }
    }
    let two_body = transform_four(&transform_four(&g, &s_inv), v);
    let b = |p: usize, q: usize, r: usize, t: usize| two_body[((p * m + q) * m + r) * m + t];

    let dim = rep.dimension();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for state in 0..dim {
        // Σ A'_{pq} b†_p b_q
        for q in 0..m {
            let Some((s1, sign1)) = annihilate_bit(state, q) else {
                continue;
            };
            for p in 0..m {
                let Some((s2, sign2)) = create_bit(s1, p) else {
                    continue;
                };
                h[(s2, state)] += Complex::new(f64::from(sign1 * sign2) * one_body[(p, q)], 0.0);
            }
        }
        // ½ Σ B'_{pqrt} b†_p b†_r b_t b_q
        for q in 0..m {
            let Some((s1, sign1)) = annihilate_bit(state, q) else {
                continue;
            };
            for t in 0..m {
                let Some((s2, sign2)) = annihilate_bit(s1, t) else {
                    continue;
                };
                for r in 0..m {
                    let Some((s3, sign3)) = create_bit(s2, r) else {
                        continue;
                    };
                    for p in 0..m {
                        let Some((s4, sign4)) = create_bit(s3, p) else {
                            continue;
                        };
                        let sign = f64::from(sign1 * sign2 * sign3 * sign4);
                        h[(s4, state)] += Complex::new(0.5 * sign * b(p, q, r, t), 0.0);
                    }
                }
            }
        }
    }
    Ok(h)
}

/// `max |H − H†|`.
pub fn hermiticity_residual(h: &ComplexMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..h.nrows() {
        for j in 0..=i {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation_value(h: &ComplexMatrix, state: &ManyBodyState) -> Complex {
    state.amplitudes.dotc(&(h * &state.amplitudes))
}

/// `⟨ψ|Ĥ₀|ψ⟩ + e_shift`.
pub fn oracle_energy(rep: &FockSpaceRep, system: &AoSystem, state: &ManyBodyState) -> Result<f64> {
    let h = build_h0(rep, system)?;
    energy_from_h0(&h, system.energy_shift, state)
}

/// [`oracle_energy`] with a prebuilt `Ĥ₀`.
pub fn energy_from_h0(h0: &ComplexMatrix, energy_shift: f64, state: &ManyBodyState) -> Result<f64> {
    let e = expectation_value(h0, state);
    if e.im.abs() > IMAGINARY_TOL * e.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue {
            residue: e.im.abs(),
        });
    }
    Ok(e.re + energy_shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hf::{energy, DensityMatrix};
    use crate::integrals::{
        parse_aoints, random_occupied_coefficients, random_system, TwoElectronTensor,
    };
    use crate::oracle::{build_ao_operators, determinant_state, SparseOperator};
    use crate::scf::core_guess;

    /// `Ĥ₀` assembled literally from products of AO operators.
    fn literal_h0(rep: &FockSpaceRep, system: &AoSystem) -> ComplexMatrix {
        let m = rep.modes();
        let s_inv = linalg::inverse_spd(rep.metric()).unwrap();
        let a = &s_inv * &system.core_h * &s_inv;
        let mut g = vec![0.0; m.pow(4)];
        for [i, j, k, l] in
            (0..m.pow(4)).map(|x| [x / m.pow(3), x / m.pow(2) % m, x / m % m, x % m])
        {
            g[((i * m + j) * m + k) * m + l] = system.two_electron.get(i, j, k, l);
        }
        let b = transform_four(&g, &s_inv);
        let dim = rep.dimension();
        let mut total = SparseOperator::zeros(dim, dim);
        for mu in 0..m {
            for nu in 0..m {
                total =
                    total + (rep.create(mu) * rep.annihilate(nu)) * Complex::new(a[(mu, nu)], 0.0);
                for ka in 0..m {
                    for ta in 0..m {
                        let coef = 0.5 * b[((mu * m + nu) * m + ka) * m + ta];
                        if coef == 0.0 {
                            continue;
                        }
                        let term = rep.create(mu)
                            * rep.create(ka)
                            * rep.annihilate(ta)
                            * rep.annihilate(nu);
                        total = total + term * Complex::new(coef, 0.0);
                    }
                }
            }
        }
        let mut dense = ComplexMatrix::zeros(dim, dim);
        for (r, c, v) in total.triplet_iter() {
            dense[(r, c)] += *v;
        }
        dense
    }

    #[test]
    fn mode_basis_assembly_matches_literal_products() {
        for seed in [1, 2] {
            let sys = random_system(4, 2, seed, 0.6).unwrap();
            let rep = build_ao_operators(&sys.metric).unwrap();
            let h = build_h0(&rep, &sys).unwrap();
            let lit = literal_h0(&rep, &sys);
            let diff = (&h - &lit).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            assert!(diff < 1e-12, "seed {seed}: {diff:e}");
        }
    }

    #[test]
    fn orthonormal_one_body_case() {
        let mut sys = random_system(3, 1, 4, 0.0).unwrap();
        sys.two_electron = TwoElectronTensor::zeros(3);
        let rep = build_ao_operators(&sys.metric).unwrap();
        let h = build_h0(&rep, &sys).unwrap();
        // Single-particle block of Σ h_{μν} a†_μ a_ν is h itself.
        for mu in 0..3 {
            for nu in 0..3 {
                assert!((h[(1 << mu, 1 << nu)].re - sys.core_h[(mu, nu)]).abs() < 1e-15);
            }
        }
        assert_eq!(h[(0, 0)], Complex::new(0.0, 0.0));
    }

    #[test]
    fn scalar_energy() {
        let sys = AoSystem::new(
            Matrix::from_element(1, 1, 2.0),
            Matrix::from_element(1, 1, -2.0),
            TwoElectronTensor::zeros(1),
            1,
            0.0,
            "scalar",
        )
        .unwrap();
        let rep = build_ao_operators(&sys.metric).unwrap();
        let c = Matrix::from_element(1, 1, 1.0 / 2f64.sqrt());
        let psi = determinant_state(&rep, &c).unwrap();
        let e = oracle_energy(&rep, &sys, &psi).unwrap();
        assert!((e + 1.0).abs() < 1e-15);
        let vac = ManyBodyState::vacuum(2);
        assert_eq!(oracle_energy(&rep, &sys, &vac).unwrap(), 0.0);
    }

    #[test]
    fn matches_density_energy() {
        for seed in 0..6 {
            let sys = random_system(6, 3, seed, 0.6).unwrap();
            let rep = build_ao_operators(&sys.metric).unwrap();
            let c = random_occupied_coefficients(&sys.metric, 3, seed + 7).unwrap();
            let psi = determinant_state(&rep, &c).unwrap();
            let d = DensityMatrix::from_coefficients(&c);
            let e_core = energy(&d, &sys.core_h, &sys.two_electron, sys.energy_shift);
            let e_oracle = oracle_energy(&rep, &sys, &psi).unwrap();
            assert!((e_core - e_oracle).abs() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn toy_h0_is_hermitian() {
        let text = include_str!("../../fixtures/toy-heh.aoints");
        let sys = parse_aoints(text).unwrap().into_spin();
        let rep = build_ao_operators(&sys.metric).unwrap();
        let h = build_h0(&rep, &sys).unwrap();
        assert!(hermiticity_residual(&h) < 1e-11);
        let d = core_guess(&sys).unwrap();
        let c = crate::hf::occupied_coefficients(&d, &sys.metric, 2).unwrap();
        let psi = determinant_state(&rep, &c).unwrap();
        let e = energy_from_h0(&h, sys.energy_shift, &psi).unwrap();
        let e_core = energy(&d, &sys.core_h, &sys.two_electron, sys.energy_shift);
        assert!((e - e_core).abs() < 1e-10);
    }

    #[test]
    fn two_body_cap() {
        let sys = random_system(11, 1, 0, 0.1).unwrap();
        let rep = build_ao_operators(&sys.metric).unwrap();
        assert!(matches!(
            build_h0(&rep, &sys),
            Err(Error::OracleCap { m: 11, cap: 10, .. })
        ));
    }
}
