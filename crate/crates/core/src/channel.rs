//! The collective rotation channel `E(T) = Σ_k E_k T E_k†` with Kraus
//! operators `E_k = exp(iθ_k J_k) / √3`.

use crate::collective::CollectiveSystem;
use crate::error::{Error, Result};
use crate::kernel::{herm_expm, kron, null_space, unvectorize, Budget, ComplexMatrix, Tolerances};
use crate::scalar::{cplx, Real};

#[derive(Clone, Debug)]
pub struct RotationChannel<T: Real> {
    pub system: CollectiveSystem<T>,
    pub thetas: [T; 3],
    /// `[E_x, E_y, E_z]`.
    pub kraus: [ComplexMatrix<T>; 3],
}

/// `(0.9, 1.0, 1.1) · π / (2ns + 1)`.
pub fn default_thetas<T: Real>(system: &CollectiveSystem<T>) -> [T; 3] {
    let width = T::from_usize_lossy(system.ns.twice() as usize + 1);
    let base = T::pi() / width;
    [T::lit(0.9) * base, base, T::lit(1.1) * base]
}

/// Each angle must be nonzero with `|θ|·2ns < 2π`, which keeps `e^{iθm}`
/// injective on the spectrum `{-ns, …, ns}` of every `J_k`.
pub fn check_thetas<T: Real>(thetas: &[T; 3], ns_twice: i64) -> Result<()> {
    let width = T::from_usize_lossy(ns_twice as usize);
    for (axis, &t) in ['x', 'y', 'z'].iter().zip(thetas) {
        if !t.is_finite() || t == T::zero() || t.abs() * width >= T::two_pi() {
            return Err(Error::DegenerateAngle {
                axis: *axis,
                theta: t.to_f64_lossy(),
                width: width.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

pub fn build_channel<T: Real>(
    system: CollectiveSystem<T>,
    thetas: Option<[T; 3]>,
    tol: &Tolerances<T>,
    budget: &Budget,
) -> Result<RotationChannel<T>> {
    Budget::check(budget.max_dense_dim, system.dim)?;
    let thetas = match thetas {
        Some(t) => {
            check_thetas(&t, system.ns.twice())?;
            t
        }
        None => default_thetas(&system),
    };
    let scale = cplx(T::one() / T::lit(3.0).sqrt());
    let gens = system.dense_generators();
    let mut kraus = Vec::with_capacity(3);
    for (g, &t) in gens.iter().zip(&thetas) {
        kraus.push(herm_expm(g, t, tol)? * scale);
    }
    let kraus: [ComplexMatrix<T>; 3] = kraus.try_into().expect("three Kraus operators");
    Ok(RotationChannel { system, thetas, kraus })
}

impl<T: Real> RotationChannel<T> {
    pub fn dim(&self) -> usize {
        self.system.dim
    }

    pub fn apply(&self, t: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let n = self.dim();
        if t.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                op: "channel apply",
                left: t.shape(),
                right: (n, n),
            });
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| acc + e * t * e.adjoint()))
    }

    /// `||Σ E_k† E_k - I||_F`.
    pub fn trace_preservation_residual(&self) -> T {
        let n = self.dim();
        let s = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| acc + e.adjoint() * e);
        (s - ComplexMatrix::identity(n, n)).norm()
    }

    /// `||Σ E_k E_k† - I||_F`.
    pub fn unitality_residual(&self) -> T {
        let n = self.dim();
        let s = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| acc + e * e.adjoint());
        (s - ComplexMatrix::identity(n, n)).norm()
    }

    /// Matrix `S` of `T ↦ E(T)` in the column-stacked basis:
    /// `S = Σ_k conj(E_k) ⊗ E_k`.
    pub fn superoperator(&self, budget: &Budget) -> Result<ComplexMatrix<T>> {
        Budget::check(budget.max_oracle_dim, self.dim())?;
        let n = self.dim();
        Ok(self.kraus.iter().fold(ComplexMatrix::zeros(n * n, n * n), |acc, e| {
            acc + kron(&e.conjugate(), e)
        }))
    }

    /// Frobenius-orthonormal basis of `Fix(E)`, from the kernel of `S - I`.
    pub fn fixed_point_basis(&self, tol: &Tolerances<T>, budget: &Budget) -> Result<Vec<ComplexMatrix<T>>> {
        let n = self.dim();
        let mut s = self.superoperator(budget)?;
        for i in 0..n * n {
            s[(i, i)] -= cplx(T::one());
        }
        Ok(null_space(&s, tol).into_iter().map(|v| unvectorize(&v, n)).collect())
    }
}
