//! Spin-s irreducible representation of su(2) on a single qudit.
//!
//! Basis index `k` carries `Σ_z` eigenvalue `m = -s + k`, so index 0 is the
//! lowest weight. The raising matrix has `⟨m+1|Σ_+|m⟩ = sqrt(s(s+1) - m(m+1))`.
//! For `d = 2` this is the usual spin-1/2 triple written in the order
//! `|-1/2⟩, |+1/2⟩`.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::kernel::{commutator, ComplexMatrix};
use crate::scalar::{cplx, imag_unit, Real};

#[derive(Clone, Debug)]
pub struct SpinRep<T: Real> {
    pub d: usize,
    pub s: HalfInt,
    pub sigma_x: ComplexMatrix<T>,
    pub sigma_y: ComplexMatrix<T>,
    pub sigma_z: ComplexMatrix<T>,
    pub sigma_plus: ComplexMatrix<T>,
    pub sigma_minus: ComplexMatrix<T>,
}

impl<T: Real> SpinRep<T> {
    pub fn new(d: usize) -> Result<Self> {
        make_spin_rep(d)
    }

    /// Weight of basis index `k`.
    pub fn weight(&self, k: usize) -> HalfInt {
        HalfInt::from_twice(2 * k as i64) - self.s
    }
}

pub fn make_spin_rep<T: Real>(d: usize) -> Result<SpinRep<T>> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let s = HalfInt::from_twice(d as i64 - 1);
    let sr: T = s.to_real();
    let mut plus = ComplexMatrix::<T>::zeros(d, d);
    let mut z = ComplexMatrix::<T>::zeros(d, d);
    for k in 0..d {
        let m = T::from_usize_lossy(k) - sr;
        z[(k, k)] = cplx(m);
        if k + 1 < d {
            let c = sr * (sr + T::one()) - m * (m + T::one());
            plus[(k + 1, k)] = cplx(c.sqrt());
        }
    }
    let minus = plus.adjoint();
    let half = cplx(T::lit(0.5));
    let sigma_x = (&plus + &minus) * half;
    // (Σ+ - Σ-) / (2i) = -i/2 (Σ+ - Σ-)
    let sigma_y = (&plus - &minus) * (-imag_unit::<T>() * half);
    Ok(SpinRep {
        d,
        s,
        sigma_x,
        sigma_y,
        sigma_z: z,
        sigma_plus: plus,
        sigma_minus: minus,
    })
}

/// Largest Frobenius deviation among `[x,y] - iz`, `[z,x] - iy`, `[y,z] - ix`.
pub fn su2_deviation<T: Real>(x: &ComplexMatrix<T>, y: &ComplexMatrix<T>, z: &ComplexMatrix<T>) -> T {
    let i = imag_unit::<T>();
    let r1 = (commutator(x, y) - z * i).norm();
    let r2 = (commutator(z, x) - y * i).norm();
    let r3 = (commutator(y, z) - x * i).norm();
    r1.max(r2).max(r3)
}

pub fn check_su2_relations<T: Real>(rep: &SpinRep<T>) -> T {
    su2_deviation(&rep.sigma_x, &rep.sigma_y, &rep.sigma_z)
}
