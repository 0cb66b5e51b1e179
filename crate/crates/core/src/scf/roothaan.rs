use super::diis::{diis_error, diis_extrapolate};
use super::{
    aufbau, canonical_orbitals, core_guess, IterationRecord, ScfOptions, ScfSolution, Solver,
};
use crate::error::Result;
use crate::hf::density::idempotency_residual;
use crate::hf::{energy_and_fock, gradient, DensityMatrix, FockMatrix};
use crate::integrals::AoSystem;
use crate::linalg::{self, Matrix};

/// Roothaan–Hall SCF from the core-Hamiltonian guess.
pub fn scf_roothaan(system: &AoSystem, options: &ScfOptions) -> Result<ScfSolution> {
    let guess = core_guess(system)?;
    scf_roothaan_from(system, options, guess)
}

/// Roothaan–Hall SCF from a given density.
///
/// Each iteration builds `F(D)`, optionally DIIS-extrapolates it, solves
/// `F C = S C ε` and occupies the lowest `N` orbitals. Convergence requires
/// both `|ΔE| ≤ energy_tolerance` and `‖FDS − SDF‖_max ≤ gradient_tolerance`.
pub fn scf_roothaan_from(
    system: &AoSystem,
    options: &ScfOptions,
    guess: DensityMatrix,
) -> Result<ScfSolution> {
    options.validate()?;
    let s = &system.metric;
    let h = &system.core_h;
    let g = &system.two_electron;
    let n = system.n_electrons;
    let s_inv_sqrt = linalg::inverse_sqrt(s)?;

    let mut d = guess;
    let (mut e, mut f) = energy_and_fock(&d, h, g, system.energy_shift);
    let mut grad = gradient(&d, &f, s).max_norm();
    let mut trace = vec![IterationRecord {
        iteration: 0,
        energy: e,
        gradient_max: grad,
        step: 0.0,
        idempotency_residual: idempotency_residual(d.matrix(), s),
    }];
    let mut history: Vec<(FockMatrix, Matrix)> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=options.max_iterations {
        iterations = it;
        let (f_use, dimension) = if options.diis_depth > 0 {
            history.push((f.clone(), diis_error(&f, &d, s, &s_inv_sqrt)));
            if history.len() > options.diis_depth {
                history.remove(0);
            }
            let ext = diis_extrapolate(&history)?;
            (ext.fock, ext.dimension)
        } else {
            (f.clone(), 0)
        };

        let eig = linalg::generalized_eig(f_use.matrix(), s)?;
        let d_new = DensityMatrix::from_coefficients(&aufbau(&eig, n)?);
        let (e_new, f_new) = energy_and_fock(&d_new, h, g, system.energy_shift);
        let grad_new = gradient(&d_new, &f_new, s).max_norm();
        trace.push(IterationRecord {
            iteration: it,
            energy: e_new,
            gradient_max: grad_new,
            step: dimension as f64,
            idempotency_residual: idempotency_residual(d_new.matrix(), s),
        });
        let delta_e = (e_new - e).abs();
        d = d_new;
        f = f_new;
        e = e_new;
        grad = grad_new;
        if delta_e <= options.energy_tolerance && grad <= options.gradient_tolerance {
            converged = true;
            break;
        }
    }

    let (orbital_energies, coefficients) = canonical_orbitals(&d, &f, s, n)?;
    Ok(ScfSolution {
        solver: Solver::Roothaan,
        density: d,
        fock: f,
        energy: e,
        orbital_energies,
        coefficients,
        occupied_count: n,
        gradient_max: grad,
        iterations,
        trace,
        converged,
        stall_reason: (!converged).then(|| "iteration limit reached".to_string()),
    })
}
