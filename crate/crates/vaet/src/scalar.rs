//! Real scalar abstraction for the numeric layer.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real floating-point scalar the numeric layer is generic over.
///
/// Bundles exactly the `num-traits` capabilities the algorithms use, so a
/// type implements it by being an IEEE float with constants and primitive
/// conversions. Implemented for `f32` and `f64`; `f64` is the supported
/// production precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for a lossy conversion from `f64` literals and parameters.
    /// Conversion from finite `f64` cannot fail for IEEE targets.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any IEEE scalar")
    }

    /// Complex unit with this scalar as real part type.
    fn i() -> Complex<Self> {
        Complex::new(Self::zero(), Self::one())
    }

    /// Widening conversion for diagnostics and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("IEEE scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the generic scalar, `re + i*im` from `f64` inputs.
pub fn cplx<R: Scalar>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::of(re), R::of(im))
}

/// Real `f64` value lifted into the generic scalar.
pub fn rl<R: Scalar>(x: f64) -> R {
    R::of(x)
}
