//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All linear algebra is written against [`Real`], which is implemented for
//! `f32` and `f64`. Complex entries are `Complex<T>` from `num-complex`
//! (re-exported through nalgebra).

use nalgebra::{Complex, ComplexField, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable as the component type of complex
/// matrices.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static {
    /// Default relative threshold for rank decisions.
    fn default_rank_tol() -> Self;
    /// Default tolerance for invariant checks.
    fn default_verify_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }
}

impl Real for f64 {
    fn default_rank_tol() -> Self {
        1e-10
    }
    fn default_verify_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_rank_tol() -> Self {
        1e-5
    }
    fn default_verify_tol() -> Self {
        1e-4
    }
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

#[inline]
pub fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
