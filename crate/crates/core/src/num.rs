//! Scalar abstractions shared by the numerical kernels.
//!
//! Physical parameters (shifts, couplings, gyromagnetic ratios) are parsed and
//! stored as `f64`; operators, eigensystems and spectra are generic over a
//! [`Real`] scalar. Lab-frame NMR energies need roughly ten significant digits,
//! so `f64` is the only sensible choice for full simulations. `f32` remains
//! useful for the lineshape and similarity code on pre-shifted axes, and the
//! double-double `TwoFloat` backs the extended-precision reference solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, NumCast, ToPrimitive};

/// Floating-point scalar used by the spectral and lineshape kernels.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` parameter.
    #[inline]
    fn of(value: f64) -> Self {
        <Self as NumCast>::from(value).expect("f64 is representable in every Real")
    }

    /// Unit roundoff of the format.
    #[inline]
    fn resolution() -> Self {
        Self::epsilon()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Double-double scalar (about 32 significant digits), used by the
/// symmetry-blind reference solver.
impl Real for twofloat::TwoFloat {
    // `Float::epsilon` is the smallest normal number for this type
    fn resolution() -> Self {
        twofloat::TwoFloat::from_f64(2f64.powi(-104))
    }
}

/// Sum of an iterator of scalars.
pub fn total<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

/// Scalars the dense eigensolver backend can work with.
pub trait EigenScalar: Real + faer::traits::RealField {}

impl EigenScalar for f32 {}
impl EigenScalar for f64 {}
