//! Seeded synthetic systems for property testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{symmetry_images, AoSystem, TwoElectronTensor};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Half-width of the uniform distribution feeding the two-electron tensor
/// before 8-fold averaging.
pub const TWO_ELECTRON_SCALE: f64 = 0.5;

/// Random spin-orbital system, deterministic in `seed`.
///
/// The metric is `(1 - s) I + s C`, where `C` is a random correlation matrix
/// (a Gram matrix rescaled to unit diagonal); its eigenvalues are bounded
/// below by `1 - s`, so it is SPD for every `s < 1`. The core Hamiltonian is
/// uniform in `[-1, 1]`. The two-electron tensor averages a random tensor over
/// the 8-fold symmetry group; it is not required to be a physical
/// (positive-semidefinite) interaction.
pub fn random_system(
    n_spin_orbitals: usize,
    n_electrons: usize,
    seed: u64,
    overlap_strength: f64,
) -> Result<AoSystem> {
    let m = n_spin_orbitals;
    if m == 0 || n_electrons > m {
        return Err(Error::InvalidSystem(format!(
            "need 0 <= N <= M with M > 0 (got M = {m}, N = {n_electrons})"
        )));
    }
    if !(0.0..1.0).contains(&overlap_strength) {
        return Err(Error::InvalidSystem(format!(
            "overlap strength {overlap_strength} outside [0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let gram = &a * a.transpose();
    let mut metric = Matrix::identity(m, m);
    if overlap_strength > 0.0 {
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let c = gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt();
                    metric[(i, j)] = overlap_strength * c;
                }
            }
        }
        metric = linalg::symmetrize(&metric);
    }

    let mut core_h = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = rng.gen_range(-1.0..1.0);
            core_h[(i, j)] = v;
            core_h[(j, i)] = v;
        }
    }

    let mut raw = vec![0.0; m * m * m * m];
    for x in raw.iter_mut() {
        *x = rng.gen_range(-TWO_ELECTRON_SCALE..TWO_ELECTRON_SCALE);
    }
    let at = |[i, j, k, l]: [usize; 4]| raw[((i * m + j) * m + k) * m + l];
    let mut g = TwoElectronTensor::zeros(m);
    for q in g.canonical_quadruples().collect::<Vec<_>>() {
        let mean = symmetry_images(q).into_iter().map(at).sum::<f64>() / 8.0;
        g.set(q[0], q[1], q[2], q[3], mean);
    }

    AoSystem::new(
        metric,
        core_h,
        g,
        n_electrons,
        0.0,
        format!("random-m{m}-n{n_electrons}-seed{seed}"),
    )
}

/// Random `M × N` coefficient block with `Cᵀ S C = I`.
pub fn random_occupied_coefficients(
    metric: &Matrix,
    n_occupied: usize,
    seed: u64,
) -> Result<Matrix> {
    let m = linalg::ensure_symmetric(metric)?;
    if n_occupied > m {
        return Err(Error::InvalidSystem(format!(
            "cannot occupy {n_occupied} of {m} orbitals"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let y = Matrix::from_fn(m, n_occupied, |_, _| rng.gen_range(-1.0..1.0));
        let gram = y.transpose() * metric * &y;
        // Resample in the measure-zero case of a rank-deficient draw.
        if let Ok(t) = linalg::inverse_sqrt(&gram) {
            return Ok(y * t);
        }
    }
}

/// Random real symmetric matrix scaled to the given Frobenius norm.
pub fn random_symmetric(m: usize, seed: u64, frobenius: f64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let sym = linalg::symmetrize(&a);
    let norm = sym.norm();
    if norm == 0.0 {
        sym
    } else {
        sym * (frobenius / norm)
    }
}

/// Random real antisymmetric matrix scaled to the given Frobenius norm.
pub fn random_antisymmetric(m: usize, seed: u64, frobenius: f64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let anti = linalg::antisymmetrize(&a);
    let norm = anti.norm();
    if norm == 0.0 {
        anti
    } else {
        anti * (frobenius / norm)
    }
}
