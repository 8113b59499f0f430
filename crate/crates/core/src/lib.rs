//! Collective rotation channels on `n` spin-s qudits.
//!
//! The crate builds the collective su(2) generators, the three-Kraus
//! collective rotation channel, and the explicit `|j, m, μ⟩` basis that
//! block-diagonalizes the interaction algebra as `⊕_j 1_{p_j} ⊗ M_{q_j}` and
//! its commutant as `⊕_j M_{p_j} ⊗ 1_{q_j}`. Brute-force oracles cross-check
//! the construction, and [`codec`] encodes states into the protected
//! `M_{p_j}` factor.
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! `f64`, which is what the tolerances in the test-suite assume.

pub mod channel;
pub mod codec;
pub mod collective;
pub mod error;
pub mod export;
pub mod half;
pub mod kernel;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod spin;
pub mod structure;

pub use error::{Error, Result};
pub use half::HalfInt;
pub use kernel::{Budget, Tolerances};
pub use nalgebra::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type Matrix = kernel::ComplexMatrix<f64>;
pub type Vector = kernel::ComplexVector<f64>;
pub type Sparse = kernel::SparseOperator<f64>;
pub type Tol = Tolerances<f64>;
pub type Spin = spin::SpinRep<f64>;
pub type System = collective::CollectiveSystem<f64>;
pub type Channel = channel::RotationChannel<f64>;
pub type Decomposition = structure::StructureDecomposition<f64>;
pub type Code = codec::NoiselessCode<f64>;
pub type Density = codec::DensityMatrix<f64>;
