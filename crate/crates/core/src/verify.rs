//! Residual tables behind the `check` and `oracle` commands.

use crate::error::{Error, Result};
use crate::hf::{
    check_density_conditions, delta_from_d, energy, project_rotation, transform_density,
    DensityMatrix, OrbitalRotation, IDEMPOTENCY_TOL,
};
use crate::integrals::{
    random_antisymmetric, random_occupied_coefficients, random_symmetric, AoSystem,
};
use crate::linalg::{self, Matrix};
use crate::oracle::{
    self, build_ao_operators, build_h0, delta_transform_reference, determinant_state,
    energy_from_h0, expectation_delta, expectation_delta_complex, expectation_gamma,
    hermiticity_residual, to_complex, verify_transform_consistency, verify_wick,
};
use crate::report::Residual;
use crate::scf::{verify_equivalence, ScfSolution, EQUIVALENCE_TOL};

/// Thresholds of the oracle identities.
pub const ANTICOMMUTATOR_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-11;
pub const TRANSFORM_TOL: f64 = 1e-9;

/// Convergence, density conditions and both equivalence directions.
pub fn check_solution(
    system: &AoSystem,
    solution: &ScfSolution,
    gradient_tolerance: f64,
) -> Result<Vec<Residual>> {
    let mut out = vec![Residual::new(
        "gradient_max",
        if solution.converged {
            solution.gradient_max
        } else {
            f64::INFINITY
        },
        gradient_tolerance * (1.0 + f64::EPSILON),
    )];
    let c = check_density_conditions(
        solution.density.matrix(),
        &system.metric,
        system.n_electrons,
    )?;
    for (name, v) in [
        ("d_symmetry", c.symmetry),
        ("d_trace", c.trace_error),
        ("d_idempotency", c.idempotency),
        ("delta_symmetry", c.delta_symmetry),
        ("delta_trace", c.delta_trace_error),
        ("delta_idempotency", c.delta_idempotency),
    ] {
        out.push(Residual::new(name, v, IDEMPOTENCY_TOL));
    }
    match verify_equivalence(solution, system) {
        Ok(rep) => {
            for (name, v) in [
                ("occupied_eigen_residual", rep.occupied_eigen_residual),
                ("occupied_offdiagonal", rep.occupied_offdiagonal),
                ("occupied_span_residual", rep.occupied_span_residual),
                ("commutator_residual", rep.commutator_residual),
            ] {
                out.push(Residual::new(name, v, EQUIVALENCE_TOL));
            }
        }
        Err(Error::Unconverged) => {
            out.push(Residual::new("equivalence", f64::INFINITY, EQUIVALENCE_TOL))
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Every Fock-space identity on a seeded determinant of `system`.
///
/// Systems with more than `max_modes` spin orbitals are refused with a memory
/// estimate. The explicit Hamiltonian is only built within its own cap.
pub fn oracle_identities(system: &AoSystem, seed: u64, max_modes: usize) -> Result<Vec<Residual>> {
    let m = system.n_spin_orbitals();
    let n = system.n_electrons;
    let s = &system.metric;
    if m > max_modes {
        return Err(Error::OracleCap {
            m,
            cap: max_modes,
            bytes: oracle::memory_estimate(m),
        });
    }
    let rep = build_ao_operators(s)?;
    let mut out = Vec::new();
    let anti = rep.anticommutator_residuals();
    out.push(Residual::new(
        "anticommutator_create_create",
        anti.create_create,
        ANTICOMMUTATOR_TOL,
    ));
    out.push(Residual::new(
        "anticommutator_annihilate_annihilate",
        anti.annihilate_annihilate,
        ANTICOMMUTATOR_TOL,
    ));
    out.push(Residual::new(
        "anticommutator_create_annihilate",
        anti.create_annihilate,
        ANTICOMMUTATOR_TOL,
    ));

    let c_occ = random_occupied_coefficients(s, n, seed)?;
    let d = DensityMatrix::from_coefficients(&c_occ);
    let psi = determinant_state(&rep, &c_occ)?;
    out.push(Residual::new(
        "determinant_norm",
        (psi.norm() - 1.0).abs(),
        ORACLE_TOL,
    ));

    let delta = expectation_delta(&rep, &psi)?;
    let sds = delta_from_d(&d, s);
    out.push(Residual::new(
        "delta_equals_sds",
        linalg::max_abs_diff(delta.matrix(), sds.matrix()),
        ORACLE_TOL,
    ));
    let gamma = expectation_gamma(&rep, &psi)?;
    out.push(Residual::new(
        "wick_factorization",
        verify_wick(&gamma, delta.matrix()),
        ORACLE_TOL,
    ));

    if m <= oracle::MAX_MODES_TWO_BODY {
        let h0 = build_h0(&rep, system)?;
        out.push(Residual::new(
            "h0_hermiticity",
            hermiticity_residual(&h0),
            HERMITICITY_TOL,
        ));
        let e_oracle = energy_from_h0(&h0, system.energy_shift, &psi)?;
        let e_density = energy(
            &d,
            &system.core_h,
            &system.two_electron,
            system.energy_shift,
        );
        out.push(Residual::new(
            "energy_metric_cancellation",
            (e_oracle - e_density).abs(),
            ORACLE_TOL,
        ));
    }

    let kappa = to_complex(&random_symmetric(m, seed.wrapping_add(1), 1.0));
    let rotated = oracle::apply_kappa_rotation(&rep, &psi, &kappa)?;
    out.push(Residual::new(
        "rotation_norm",
        (rotated.norm() - 1.0).abs(),
        ORACLE_TOL,
    ));
    let reference = delta_transform_reference(&expectation_delta_complex(&rep, &psi), &kappa, s);
    let law = (expectation_delta_complex(&rep, &rotated) - reference)
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    out.push(Residual::new("delta_transformation_law", law, ORACLE_TOL));

    let x = metric_scaled_rotation(m, seed.wrapping_add(2), s);
    let bridge = verify_transform_consistency(&d, &x, s, &rep)?;
    out.push(Residual::new(
        "real_complex_transform_bridge",
        bridge.max_deviation,
        TRANSFORM_TOL,
    ));
    let redundant = &x - &project_rotation(x.generator(), &d, s).rotation;
    let moved = transform_density(&d, &redundant, s)?;
    let oracle_redundant = verify_transform_consistency(&d, &redundant, s, &rep)?;
    out.push(Residual::new(
        "redundant_rotation_invariance",
        linalg::max_abs_diff(moved.matrix(), d.matrix()) + oracle_redundant.max_deviation,
        TRANSFORM_TOL,
    ));
    Ok(out)
}

/// Random generator with `‖XS‖_F = 1`.
fn metric_scaled_rotation(m: usize, seed: u64, s: &Matrix) -> OrbitalRotation {
    let x = OrbitalRotation::antisymmetric_part(&random_antisymmetric(m, seed, 1.0));
    let size = (x.generator() * s).norm();
    if size > 0.0 {
        x.scaled(1.0 / size)
    } else {
        x
    }
}
