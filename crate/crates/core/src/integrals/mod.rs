//! Problem statement: metric, core Hamiltonian and two-electron integrals.
//!
//! Two-electron integrals use chemists' notation throughout: `g[i,j,k,l]` is
//! `(ij|kl)`, with `i, j` on electron 1 and `k, l` on electron 2. Swapping to
//! physicists' `<ik|jl>` ordering is a silent-corruption bug, so every API here
//! takes the chemists' ordering. Indices are 0-based in code and 1-based in
//! files.

pub mod aoints;
pub mod synth;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

pub use aoints::{parse_aoints, write_aoints};
pub use synth::{
    random_antisymmetric, random_occupied_coefficients, random_symmetric, random_system,
};

/// Index of the unordered pair `{i, j}` in lower-triangular packing.
#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Real two-electron tensor stored once per 8-fold symmetry class.
///
/// Any of `(ij|kl) = (ji|kl) = (ij|lk) = (kl|ij)` and their compositions reads
/// and writes the same slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoElectronTensor {
    order: usize,
    packed: Vec<f64>,
}

impl TwoElectronTensor {
    pub fn zeros(order: usize) -> Self {
        let pairs = order * (order + 1) / 2;
        Self {
            order,
            packed: vec![0.0; pairs * (pairs + 1) / 2],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn slot(i: usize, j: usize, k: usize, l: usize) -> usize {
        pair_index(pair_index(i, j), pair_index(k, l))
    }

    /// `(ij|kl)`, 0-based.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.packed[Self::slot(i, j, k, l)]
    }

    /// Writes `(ij|kl)` and, implicitly, all symmetry-equivalent entries.
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        let slot = Self::slot(i, j, k, l);
        self.packed[slot] = value;
    }

    /// Symmetry-unique quadruples `(i, j, k, l)` with `i <= j`, `k <= l` and
    /// `(i, j) <= (k, l)` lexicographically, in lexicographic order.
    pub fn canonical_quadruples(&self) -> impl Iterator<Item = [usize; 4]> {
        let m = self.order;
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
        let n = pairs.len();
        (0..n).flat_map(move |a| {
            let pairs = pairs.clone();
            (a..n).map(move |b| {
                let (i, j) = pairs[a];
                let (k, l) = pairs[b];
                [i, j, k, l]
            })
        })
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// The eight index permutations that leave a real `(ij|kl)` unchanged.
pub fn symmetry_images([i, j, k, l]: [usize; 4]) -> [[usize; 4]; 8] {
    [
        [i, j, k, l],
        [j, i, k, l],
        [i, j, l, k],
        [j, i, l, k],
        [k, l, i, j],
        [l, k, i, j],
        [k, l, j, i],
        [l, k, j, i],
    ]
}

/// Spin-orbital problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AoSystem {
    pub metric: Matrix,
    pub core_h: Matrix,
    pub two_electron: TwoElectronTensor,
    pub n_electrons: usize,
    pub energy_shift: f64,
    pub label: String,
}

/// Spatial-orbital problem; expand with [`expand_spatial_to_spin`] before solving.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSystem {
    pub metric: Matrix,
    pub core_h: Matrix,
    pub two_electron: TwoElectronTensor,
    pub n_electrons: usize,
    pub energy_shift: f64,
    pub label: String,
}

fn validate_parts(
    metric: &Matrix,
    core_h: &Matrix,
    two_electron: &TwoElectronTensor,
    n_electrons: usize,
    max_electrons: usize,
    energy_shift: f64,
) -> Result<()> {
    let m = linalg::ensure_symmetric(metric)?;
    if m == 0 {
        return Err(Error::InvalidSystem("basis is empty".into()));
    }
    if linalg::ensure_symmetric(core_h)? != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: core_h.nrows(),
        });
    }
    if two_electron.order() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: two_electron.order(),
        });
    }
    if !two_electron.is_finite() || !energy_shift.is_finite() {
        return Err(Error::NonFinite);
    }
    if n_electrons > max_electrons {
        return Err(Error::InvalidSystem(format!(
            "{n_electrons} electrons do not fit in {max_electrons} spin orbitals"
        )));
    }
    let chol = linalg::cholesky_spd_check(metric)?;
    if !chol.positive_definite {
        let smallest = linalg::sym_eig(metric)?.values[0];
        return Err(Error::NotPositiveDefinite { smallest });
    }
    // Also rejects near-linear dependence.
    linalg::inverse_sqrt(metric)?;
    Ok(())
}

impl AoSystem {
    pub fn new(
        metric: Matrix,
        core_h: Matrix,
        two_electron: TwoElectronTensor,
        n_electrons: usize,
        energy_shift: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let sys = Self {
            metric,
            core_h,
            two_electron,
            n_electrons,
            energy_shift,
            label: label.into(),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        validate_parts(
            &self.metric,
            &self.core_h,
            &self.two_electron,
            self.n_electrons,
            self.metric.nrows(),
            self.energy_shift,
        )
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.metric.nrows()
    }
}

impl SpatialSystem {
    pub fn new(
        metric: Matrix,
        core_h: Matrix,
        two_electron: TwoElectronTensor,
        n_electrons: usize,
        energy_shift: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let sys = Self {
            metric,
            core_h,
            two_electron,
            n_electrons,
            energy_shift,
            label: label.into(),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        validate_parts(
            &self.metric,
            &self.core_h,
            &self.two_electron,
            self.n_electrons,
            2 * self.metric.nrows(),
            self.energy_shift,
        )
    }

    pub fn n_spatial(&self) -> usize {
        self.metric.nrows()
    }
}

/// Either flavour of system, as read from an AOINTS file.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedSystem {
    SpinOrbital(AoSystem),
    Spatial(SpatialSystem),
}

impl ParsedSystem {
    pub fn label(&self) -> &str {
        match self {
            ParsedSystem::SpinOrbital(s) => &s.label,
            ParsedSystem::Spatial(s) => &s.label,
        }
    }

    /// Spin-orbital form, expanding spatial input.
    pub fn into_spin(self) -> AoSystem {
        match self {
            ParsedSystem::SpinOrbital(s) => s,
            ParsedSystem::Spatial(s) => expand_spatial_to_spin(&s),
        }
    }
}

/// Interleaved (αβαβ…) spin expansion: spatial orbital `a` (0-based) becomes
/// spin orbitals `2a` (α) and `2a + 1` (β).
pub fn expand_spatial_to_spin(sys: &SpatialSystem) -> AoSystem {
    let m = sys.n_spatial();
    let big = 2 * m;
    let spin_block = |src: &Matrix| {
        Matrix::from_fn(big, big, |p, q| {
            if p % 2 == q % 2 {
                src[(p / 2, q / 2)]
            } else {
                0.0
            }
        })
    };
    let mut g = TwoElectronTensor::zeros(big);
    for [a, b, c, d] in sys.two_electron.canonical_quadruples() {
        let v = sys.two_electron.get(a, b, c, d);
        if v == 0.0 {
            continue;
        }
        for s1 in 0..2 {
            for s2 in 0..2 {
                g.set(2 * a + s1, 2 * b + s1, 2 * c + s2, 2 * d + s2, v);
            }
        }
    }
    AoSystem {
        metric: spin_block(&sys.metric),
        core_h: spin_block(&sys.core_h),
        two_electron: g,
        n_electrons: sys.n_electrons,
        energy_shift: sys.energy_shift,
        label: sys.label.clone(),
    }
}
