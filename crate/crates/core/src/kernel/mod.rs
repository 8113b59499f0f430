//! Complex linear-algebra substrate: dense helpers over nalgebra, a small CSR
//! operator type, and the tolerance/budget knobs used throughout the crate.

mod dense;
mod sparse;

pub use dense::*;
pub use sparse::{apply_sparse, SparseOperator};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numerical thresholds.
///
/// `rank_tol` is relative to the largest singular value of whatever is being
/// rank-tested. `drop_tol` prunes sparse entries with modulus at or below it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    pub rank_tol: T,
    pub verify_tol: T,
    pub drop_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rank_tol: T::default_rank_tol(),
            verify_tol: T::default_verify_tol(),
            drop_tol: T::zero(),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x >= T::zero();
        if !(ok(self.rank_tol) && ok(self.verify_tol) && ok(self.drop_tol)) {
            return Err(Error::InvalidTolerance(
                "tolerances must be finite and nonnegative".into(),
            ));
        }
        if self.rank_tol >= T::one() {
            return Err(Error::InvalidTolerance("rank_tol must be < 1".into()));
        }
        Ok(())
    }
}

/// Upper limits on the Hilbert-space dimension `d^n` for the various
/// computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Sparse generators and the irrep-basis sweep.
    pub max_dim: usize,
    /// Dense `dim x dim` work: Kraus operators, the unitary `U`, projections.
    pub max_dense_dim: usize,
    /// `dim^2`-sized oracles: superoperator, brute-force commutant.
    pub max_oracle_dim: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_dim: 4096,
            max_dense_dim: 512,
            max_oracle_dim: 32,
        }
    }
}

impl Budget {
    pub fn check(limit: usize, dim: usize) -> Result<()> {
        if dim > limit {
            Err(Error::DimensionBudgetExceeded { dim, budget: limit })
        } else {
            Ok(())
        }
    }
}
