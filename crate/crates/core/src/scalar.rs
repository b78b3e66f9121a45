//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::ToPrimitive;
use rustfft::FftNum;

/// Real floating-point scalar the estimators are generic over (`f32`, `f64`).
pub trait Real: RealField + FftNum + ToPrimitive + Copy + Default {
    /// Lossy conversion from an `f64` literal.
    fn lit(value: f64) -> Self {
        nalgebra::convert(value)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cplx<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Shorthand for [`Real::lit`].
#[inline]
pub fn lit<T: Real>(value: f64) -> T {
    T::lit(value)
}

#[inline]
pub(crate) fn deg2rad<T: Real>(deg: T) -> T {
    deg * T::pi() / lit(180.0)
}

/// Squared Frobenius norm of a complex matrix.
pub(crate) fn frob_sq<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

pub(crate) fn frob<T: Real>(m: &CMatrix<T>) -> T {
    frob_sq(m).sqrt()
}
