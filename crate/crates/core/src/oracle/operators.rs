use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{Complex, SparseOperator, MAX_MODES};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Bytes held by one CSR entry of a complex operator (value plus column index).
const ENTRY_BYTES: u128 = 24;

/// `(−1)^{number of occupied modes below p}` for occupation bitstring `state`.
pub(crate) fn jordan_wigner_sign(state: usize, p: usize) -> i32 {
    if (state & ((1usize << p) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `b†_p |state⟩` as `(new state, sign)`, or `None` if mode `p` is occupied.
pub(crate) fn create_bit(state: usize, p: usize) -> Option<(usize, i32)> {
    (state & (1 << p) == 0).then(|| (state | (1 << p), jordan_wigner_sign(state, p)))
}

/// `b_p |state⟩` as `(new state, sign)`, or `None` if mode `p` is empty.
pub(crate) fn annihilate_bit(state: usize, p: usize) -> Option<(usize, i32)> {
    (state & (1 << p) != 0).then(|| (state & !(1 << p), jordan_wigner_sign(state, p)))
}

/// Approximate storage for the AO operators of an `m`-mode space.
pub fn memory_estimate(m: usize) -> u128 {
    // 2m operators with m·2^{m−1} entries each.
    let per_operator = (m as u128) << m.saturating_sub(1);
    2 * (m as u128) * per_operator * ENTRY_BYTES
}

pub(crate) fn check_cap(m: usize, cap: usize, bytes: u128) -> Result<()> {
    if m > cap {
        return Err(Error::OracleCap { m, cap, bytes });
    }
    Ok(())
}

/// Orthonormal-mode creation operators with exact integer entries.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    m: usize,
    create: Vec<CsrMatrix<i32>>,
}

impl ModeOperators {
    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn dimension(&self) -> usize {
        1 << self.m
    }

    /// `b†_p`.
    pub fn create(&self, p: usize) -> &CsrMatrix<i32> {
        &self.create[p]
    }

    /// `b_p = (b†_p)ᵀ`.
    pub fn annihilate(&self, p: usize) -> CsrMatrix<i32> {
        self.create[p].transpose()
    }

    /// Largest entry of `{b†_p, b_q} − δ_pq I` and `{b†_p, b†_q}` over all
    /// pairs, in exact integer arithmetic.
    pub fn anticommutator_defect(&self) -> i64 {
        let dim = self.dimension();
        let identity = CsrMatrix::<i32>::identity(dim);
        let annihilate: Vec<_> = (0..self.m).map(|p| self.annihilate(p)).collect();
        let mut worst = 0i64;
        let mut track = |a: &CsrMatrix<i32>| {
            for &v in a.values() {
                worst = worst.max(i64::from(v).abs());
            }
        };
        for p in 0..self.m {
            for q in 0..self.m {
                let ca = &self.create[p] * &annihilate[q] + &annihilate[q] * &self.create[p];
                if p == q {
                    track(&(ca - &identity));
                } else {
                    track(&ca);
                }
                track(&(&self.create[p] * &self.create[q] + &self.create[q] * &self.create[p]));
            }
        }
        worst
    }

    /// Complex copy of `b†_p`.
    pub fn create_complex(&self, p: usize) -> SparseOperator {
        let (offsets, cols, vals) = self.create[p].csr_data();
        CsrMatrix::try_from_csr_data(
            self.dimension(),
            self.dimension(),
            offsets.to_vec(),
            cols.to_vec(),
            vals.iter()
                .map(|&v| Complex::new(f64::from(v), 0.0))
                .collect(),
        )
        .expect("valid CSR layout copied from an existing matrix")
    }
}

/// `b†_p` for `p = 0…M−1` on the `2^M` occupation basis; bit `p` of a basis
/// index is the occupation of mode `p`.
pub fn build_mode_operators(m: usize) -> Result<ModeOperators> {
    check_cap(m, MAX_MODES, memory_estimate(m))?;
    let dim = 1usize << m;
    let create = (0..m)
        .map(|p| {
            let mut coo = CooMatrix::new(dim, dim);
            for state in 0..dim {
                if let Some((target, sign)) = create_bit(state, p) {
                    coo.push(target, state, sign);
                }
            }
            CsrMatrix::from(&coo)
        })
        .collect();
    Ok(ModeOperators { m, create })
}

/// AO creation and annihilation operators `a†_μ = Σ_p V_{μp} b†_p` with
/// `V = S^{1/2}`, so that `{a†_μ, a_ν} = (V Vᵀ)_{νμ} = S_{νμ}`.
#[derive(Debug, Clone)]
pub struct FockSpaceRep {
    metric: Matrix,
    mixing: Matrix,
    create: Vec<SparseOperator>,
    annihilate: Vec<SparseOperator>,
}

/// Max-norm residuals of the three anticommutator families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticommutatorResiduals {
    pub create_create: f64,
    pub annihilate_annihilate: f64,
    pub create_annihilate: f64,
}

impl AnticommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.create_create
            .max(self.annihilate_annihilate)
            .max(self.create_annihilate)
    }
}

fn sparse_max_abs(a: &SparseOperator) -> f64 {
    a.values().iter().fold(0.0, |m, v| m.max(v.norm()))
}

fn adjoint(a: &SparseOperator) -> SparseOperator {
    let mut t = a.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

impl FockSpaceRep {
    pub fn modes(&self) -> usize {
        self.metric.nrows()
    }

    pub fn dimension(&self) -> usize {
        1 << self.modes()
    }

    pub fn metric(&self) -> &Matrix {
        &self.metric
    }

    /// `V` with `a†_μ = Σ_p V_{μp} b†_p`.
    pub fn mixing(&self) -> &Matrix {
        &self.mixing
    }

    pub fn create(&self, mu: usize) -> &SparseOperator {
        &self.create[mu]
    }

    pub fn annihilate(&self, mu: usize) -> &SparseOperator {
        &self.annihilate[mu]
    }

    /// Residuals of `{a†_μ, a†_ν} = 0`, `{a_μ, a_ν} = 0` and
    /// `{a†_μ, a_ν} = S_{νμ}` over all pairs.
    pub fn anticommutator_residuals(&self) -> AnticommutatorResiduals {
        let m = self.modes();
        let identity = SparseOperator::identity(self.dimension());
        let mut out = AnticommutatorResiduals {
            create_create: 0.0,
            annihilate_annihilate: 0.0,
            create_annihilate: 0.0,
        };
        for mu in 0..m {
            for nu in 0..m {
                let (c_mu, c_nu) = (&self.create[mu], &self.create[nu]);
                let (a_mu, a_nu) = (&self.annihilate[mu], &self.annihilate[nu]);
                let cc = c_mu * c_nu + c_nu * c_mu;
                out.create_create = out.create_create.max(sparse_max_abs(&cc));
                let aa = a_mu * a_nu + a_nu * a_mu;
                out.annihilate_annihilate = out.annihilate_annihilate.max(sparse_max_abs(&aa));
                let ca = c_mu * a_nu + a_nu * c_mu;
                let target = &identity * Complex::new(self.metric[(nu, mu)], 0.0);
                out.create_annihilate = out.create_annihilate.max(sparse_max_abs(&(ca - target)));
            }
        }
        out
    }

    /// Explicit one-body operator `Σ_{μν} κ_{μν} a†_μ a_ν`, assembled from
    /// operator products. Meant for small spaces.
    pub fn one_body_operator(&self, kappa: &super::ComplexMatrix) -> SparseOperator {
        let m = self.modes();
        let mut total = SparseOperator::zeros(self.dimension(), self.dimension());
        for mu in 0..m {
            for nu in 0..m {
                let k = kappa[(mu, nu)];
                if k != Complex::new(0.0, 0.0) {
                    total = total + (&self.create[mu] * &self.annihilate[nu]) * k;
                }
            }
        }
        total
    }
}

/// AO operators for metric `S` through the symmetric square root of `S`.
pub fn build_ao_operators(s: &Matrix) -> Result<FockSpaceRep> {
    let m = linalg::ensure_symmetric(s)?;
    check_cap(m, MAX_MODES, memory_estimate(m))?;
    let mixing = linalg::sqrt_spd(s)?;
    let modes = build_mode_operators(m)?;
    let dim = modes.dimension();
    let create: Vec<SparseOperator> = (0..m)
        .map(|mu| {
            let mut coo = CooMatrix::new(dim, dim);
            for p in 0..m {
                let v = mixing[(mu, p)];
                if v == 0.0 {
                    continue;
                }
                for (row, col, &sign) in modes.create(p).triplet_iter() {
                    coo.push(row, col, Complex::new(v * f64::from(sign), 0.0));
                }
            }
            CsrMatrix::from(&coo)
        })
        .collect();
    let annihilate = create.iter().map(adjoint).collect();
    Ok(FockSpaceRep {
        metric: s.clone(),
        mixing,
        create,
        annihilate,
    })
}
