use super::*;
use crate::hf::{check_density_conditions, energy, gradient, DensityMatrix};
use crate::integrals::{parse_aoints, random_system, AoSystem, TwoElectronTensor};

const TOY: &str = include_str!("../../fixtures/toy-heh.aoints");

fn toy() -> AoSystem {
    parse_aoints(TOY).unwrap().into_spin()
}

fn scalar() -> AoSystem {
    let mut g = TwoElectronTensor::zeros(1);
    g.set(0, 0, 0, 0, 0.0);
    AoSystem::new(
        Matrix::from_element(1, 1, 2.0),
        Matrix::from_element(1, 1, -2.0),
        g,
        1,
        0.0,
        "scalar",
    )
    .unwrap()
}

fn descent_options() -> ScfOptions {
    ScfOptions {
        solver: Solver::DensityDescent,
        ..ScfOptions::default()
    }
}

#[test]
fn solver_names_round_trip() {
    for s in [Solver::Roothaan, Solver::DensityDescent] {
        assert_eq!(s.name().parse::<Solver>().unwrap(), s);
    }
    assert!("newton".parse::<Solver>().is_err());
}

#[test]
fn options_validation() {
    assert!(ScfOptions::default().validate().is_ok());
    let bad = ScfOptions {
        energy_tolerance: 0.0,
        ..ScfOptions::default()
    };
    assert!(bad.validate().is_err());
    let bad = ScfOptions {
        initial_step: f64::NAN,
        ..ScfOptions::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn core_guess_scalar_and_empty() {
    let sys = scalar();
    let d = core_guess(&sys).unwrap();
    assert!((d.matrix()[(0, 0)] - 0.5).abs() < 1e-15);

    let mut empty = toy();
    empty.n_electrons = 0;
    assert_eq!(core_guess(&empty).unwrap().matrix(), &Matrix::zeros(4, 4));
}

#[test]
fn core_guess_toy_is_a_density() {
    let sys = toy();
    let d = core_guess(&sys).unwrap();
    let c = check_density_conditions(d.matrix(), &sys.metric, 2).unwrap();
    assert!(c.passes(1e-12), "{c:?}");
}

#[test]
fn degenerate_frontier_is_refused() {
    // Spin expansion makes every spatial level doubly degenerate; one electron
    // sits on the degenerate pair.
    let mut sys = toy();
    sys.n_electrons = 1;
    assert!(matches!(
        core_guess(&sys),
        Err(Error::FrontierDegeneracy { n: 1, .. })
    ));
}

#[test]
fn scalar_system_both_solvers() {
    let sys = scalar();
    let r = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 1);
    assert!((r.energy + 1.0).abs() < 1e-15);
    let d = scf_density_descent(&sys, &descent_options()).unwrap();
    assert!(d.converged);
    assert_eq!(d.iterations, 0);
    assert!((d.energy + 1.0).abs() < 1e-15);
    let rep = verify_equivalence(&r, &sys).unwrap();
    assert!(rep.occupied_eigen_residual < 1e-15 && rep.commutator_residual < 1e-15);
}

#[test]
fn roothaan_toy_converges_and_is_stationary() {
    let sys = toy();
    let sol = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    assert!(sol.converged, "{:?}", sol.stall_reason);
    let f = sol.fock.matrix();
    let d = sol.density.matrix();
    let s = &sys.metric;
    let comm = f * d * s - s * d * f;
    assert!(linalg::max_abs(&comm) < 1e-8);
    for rec in &sol.trace {
        assert!(rec.idempotency_residual < 1e-12);
    }
    assert!(verify_equivalence(&sol, &sys).unwrap().passes());
}

#[test]
fn diis_preserves_the_answer_and_saves_iterations() {
    let sys = toy();
    let with = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    let without = scf_roothaan(
        &sys,
        &ScfOptions {
            diis_depth: 0,
            ..ScfOptions::default()
        },
    )
    .unwrap();
    assert!(with.converged && without.converged);
    assert!((with.energy - without.energy).abs() < 1e-10);
    assert!(with.iterations <= without.iterations);
    assert!(with.trace.iter().skip(2).any(|r| r.step > 1.0));
}

#[test]
fn descent_matches_roothaan_on_toy() {
    let sys = toy();
    let r = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    let d = scf_density_descent(&sys, &descent_options()).unwrap();
    assert!(d.converged, "{:?}", d.stall_reason);
    assert!((r.energy - d.energy).abs() < 1e-8);
    assert!(linalg::max_abs_diff(r.density.matrix(), d.density.matrix()) < 1e-6);
    assert!(verify_equivalence(&d, &sys).unwrap().passes());
}

#[test]
fn descent_from_converged_density_takes_no_steps() {
    let sys = toy();
    let r = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    let d = scf_density_descent_from(&sys, &descent_options(), r.density.clone()).unwrap();
    assert!(d.converged);
    assert_eq!(d.iterations, 0);
}

#[test]
fn descent_iterates_stay_valid_and_energy_never_rises() {
    for seed in 0..5 {
        let sys = random_system(6, 3, seed, 0.5).unwrap();
        let sol = scf_density_descent(&sys, &descent_options()).unwrap();
        let noise = 1e-13 * sol.energy.abs().max(1.0);
        for w in sol.trace.windows(2) {
            assert!(w[1].energy <= w[0].energy + noise, "seed {seed}");
            assert!(w[1].idempotency_residual < 1e-9);
        }
        let c = check_density_conditions(sol.density.matrix(), &sys.metric, 3).unwrap();
        assert!(c.passes(1e-9));
    }
}

#[test]
fn solution_orbitals_are_consistent() {
    for seed in 0..5 {
        let sys = random_system(6, 3, seed, 0.5).unwrap();
        for opts in [ScfOptions::default(), descent_options()] {
            let sol = match opts.solver {
                Solver::Roothaan => scf_roothaan(&sys, &opts),
                Solver::DensityDescent => scf_density_descent(&sys, &opts),
            }
            .unwrap();
            if !sol.converged {
                continue;
            }
            let c = &sol.coefficients;
            let ortho = c.transpose() * &sys.metric * c;
            assert!(linalg::max_abs_diff(&ortho, &Matrix::identity(6, 6)) < 1e-10);
            let occ = sol.occupied_coefficients();
            let dd = &occ * occ.transpose();
            assert!(linalg::max_abs_diff(&dd, sol.density.matrix()) < 1e-10);
            assert!(sol.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
            let e = energy(
                &sol.density,
                &sys.core_h,
                &sys.two_electron,
                sys.energy_shift,
            );
            assert_eq!(e, sol.energy);
            let g = gradient(&sol.density, &sol.fock, &sys.metric);
            assert!(g.max_norm() <= opts.gradient_tolerance);
        }
    }
}

#[test]
fn unconverged_is_reported_not_raised() {
    let sys = toy();
    let sol = scf_roothaan(
        &sys,
        &ScfOptions {
            max_iterations: 1,
            ..ScfOptions::default()
        },
    )
    .unwrap();
    assert!(!sol.converged);
    assert!(sol.stall_reason.is_some());
    assert_eq!(verify_equivalence(&sol, &sys), Err(Error::Unconverged));
}

#[test]
fn solvers_are_deterministic() {
    let sys = random_system(6, 3, 11, 0.5).unwrap();
    for opts in [ScfOptions::default(), descent_options()] {
        let run = || match opts.solver {
            Solver::Roothaan => scf_roothaan(&sys, &opts).unwrap(),
            Solver::DensityDescent => scf_density_descent(&sys, &opts).unwrap(),
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn empty_occupation_gives_the_shift() {
    let mut sys = toy();
    sys.n_electrons = 0;
    sys.energy_shift = 0.75;
    let r = scf_roothaan(&sys, &ScfOptions::default()).unwrap();
    let d = scf_density_descent(&sys, &descent_options()).unwrap();
    assert_eq!(r.energy, 0.75);
    assert_eq!(d.energy, 0.75);
    assert_eq!(r.density, DensityMatrix::zeros(4));
}
