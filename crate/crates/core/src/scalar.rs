//! Scalar abstraction shared by every numerical module.
//!
//! All geometry, channel synthesis, spectral estimation and position
//! estimation code is written against [`Real`], so the same algorithms run in
//! `f64` (the default used by the harness) or `f32`.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point field usable by the estimators.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal or measured value into `Self`.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Machine epsilon of the underlying representation.
    fn eps() -> Self;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Dense complex matrix (observations, covariances, projectors).
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Dense complex column vector (steering vectors, weights, amplitudes).
pub type CVector<T> = DVector<Complex<T>>;

/// `exp(j·phase)` without requiring `num_traits::Float` on `T`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Complex zero.
#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex number with zero imaginary part.
#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `x^H y` for two complex vectors of equal length.
pub fn dotc<T: Real>(x: &CVector<T>, y: &CVector<T>) -> Complex<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y.iter())
        .fold(czero(), |acc, (a, b)| acc + a.conj() * b)
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr<T: Real>(x: &CVector<T>) -> T {
    x.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Squared Frobenius norm of a complex matrix.
pub fn frobenius_sqr<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}
