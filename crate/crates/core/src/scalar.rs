//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point type the spectral machinery runs on: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the value is unrepresentable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    /// Machine epsilon scaled into a usable absolute slack.
    #[inline]
    fn slack() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `-i * z`
#[inline]
pub(crate) fn mul_neg_i<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.im, -z.re)
}

/// `e^{i theta}`
#[inline]
pub(crate) fn expi<T: Real>(theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}
