//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the numerical core is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Pivot modulus, relative to the largest row norm, below which a matrix
    /// is treated as singular.
    const SINGULAR_TOL: f64;
    /// Relative size at which series and products are truncated.
    const SERIES_TOL: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f64 {
    const SINGULAR_TOL: f64 = 1e-12;
    const SERIES_TOL: f64 = 1e-18;
}

impl Real for f32 {
    const SINGULAR_TOL: f64 = 1e-5;
    const SERIES_TOL: f64 = 1e-10;
}
