use super::{canonical_orbitals, core_guess, IterationRecord, ScfOptions, ScfSolution, Solver};
use crate::error::Result;
use crate::hf::density::idempotency_residual;
use crate::hf::fock::trace_product;
use crate::hf::{
    energy_and_fock, gradient, project_rotation, purify, transform_density, DensityMatrix,
};
use crate::integrals::AoSystem;
use crate::linalg::Matrix;

/// Steps shorter than this end the line search.
const MIN_STEP: f64 = 1e-12;
/// Purify when the transformed density drifts further than this from `DSD = D`.
const PURIFY_TRIGGER: f64 = 1e-12;
/// Relative size of round-off in an energy evaluation.
const ENERGY_NOISE: f64 = 64.0 * f64::EPSILON;

/// Density-matrix descent from the core-Hamiltonian guess.
pub fn scf_density_descent(system: &AoSystem, options: &ScfOptions) -> Result<ScfSolution> {
    let guess = core_guess(system)?;
    scf_density_descent_from(system, options, guess)
}

/// Density-matrix descent in the exponential parametrization.
///
/// With `G = SDF − FDS` the first-order energy change under `X` is `Tr(X G)`,
/// so `X = α P(G)` (the redundancy-projected gradient) lowers the energy for
/// small `α > 0`. Each step moves `D ← purify(exp(XS) D exp(−SX))`; `α` is
/// halved until the exact energy decreases. The first trial length of each step
/// is the Barzilai–Borwein estimate from the previous step. Once the predicted
/// decrease drops below energy round-off, a step is accepted when it does not
/// raise the energy beyond round-off and lowers the Frobenius norm of the
/// gradient. Near a minimum that norm falls for any short step along the
/// descent direction, which the max norm does not guarantee.
pub fn scf_density_descent_from(
    system: &AoSystem,
    options: &ScfOptions,
    guess: DensityMatrix,
) -> Result<ScfSolution> {
    options.validate()?;
    let s = &system.metric;
    let h = &system.core_h;
    let g = &system.two_electron;
    let shift = system.energy_shift;
    let n = system.n_electrons;

    let mut d = guess;
    let (mut e, mut f) = energy_and_fock(&d, h, g, shift);
    let mut grad = gradient(&d, &f, s);
    let mut trace = vec![IterationRecord {
        iteration: 0,
        energy: e,
        gradient_max: grad.max_norm(),
        step: 0.0,
        idempotency_residual: idempotency_residual(d.matrix(), s),
    }];
    let mut converged = grad.max_norm() <= options.gradient_tolerance;
    let mut stall_reason = None;
    let mut iterations = 0;
    let mut alpha = options.initial_step;
    let mut previous: Option<(f64, Matrix)> = None;

    while !converged && iterations < options.max_iterations {
        let direction = project_rotation(&grad.matrix, &d, s).rotation;
        if let Some((last_alpha, last_direction)) = previous.take() {
            alpha = barzilai_borwein(last_alpha, &last_direction, direction.generator())
                .unwrap_or(2.0 * last_alpha);
        }
        // Tr(P(G) G) ≤ 0 whenever D is idempotent.
        let slope = trace_product(direction.generator(), &grad.matrix);
        let noise = ENERGY_NOISE * e.abs().max(1.0);

        let accepted = loop {
            if alpha < MIN_STEP {
                break None;
            }
            let moved = transform_density(&d, &direction.scaled(alpha), s)?;
            let trial = if idempotency_residual(moved.matrix(), s) > PURIFY_TRIGGER {
                purify(&moved, s)?.density
            } else {
                moved
            };
            let (e_trial, f_trial) = energy_and_fock(&trial, h, g, shift);
            let grad_trial = gradient(&trial, &f_trial, s);
            let decreased = e_trial < e;
            let in_noise = (alpha * slope).abs() < noise
                && e_trial <= e + noise
                && grad_trial.matrix.norm() < grad.matrix.norm();
            if decreased || in_noise {
                break Some((trial, e_trial, f_trial, grad_trial));
            }
            alpha *= 0.5;
        };

        let Some((d_new, e_new, f_new, grad_new)) = accepted else {
            stall_reason = Some(format!(
                "line search found no decrease down to step {MIN_STEP:e}"
            ));
            break;
        };
        iterations += 1;
        let delta_e = (e_new - e).abs();
        trace.push(IterationRecord {
            iteration: iterations,
            energy: e_new,
            gradient_max: grad_new.max_norm(),
            step: alpha,
            idempotency_residual: idempotency_residual(d_new.matrix(), s),
        });
        d = d_new;
        e = e_new;
        f = f_new;
        grad = grad_new;
        converged =
            delta_e <= options.energy_tolerance && grad.max_norm() <= options.gradient_tolerance;
        previous = Some((alpha, direction.generator().clone()));
    }

    if !converged && stall_reason.is_none() {
        stall_reason = Some("iteration limit reached".to_string());
    }
    let (orbital_energies, coefficients) = canonical_orbitals(&d, &f, s, n)?;
    Ok(ScfSolution {
        solver: Solver::DensityDescent,
        density: d,
        fock: f,
        energy: e,
        orbital_energies,
        coefficients,
        occupied_count: n,
        gradient_max: grad.max_norm(),
        iterations,
        trace,
        converged,
        stall_reason,
    })
}

/// Barzilai–Borwein length for the next step along `current`, given that the
/// last accepted step was `alpha · last`. `None` when the curvature estimate
/// is not positive.
fn barzilai_borwein(alpha: f64, last: &Matrix, current: &Matrix) -> Option<f64> {
    let ss = last.dot(last);
    let sy = ss - last.dot(current);
    (sy > 0.0 && ss > 0.0)
        .then(|| alpha * ss / sy)
        .filter(|a| a.is_finite())
}
