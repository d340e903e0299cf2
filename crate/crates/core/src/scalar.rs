//! Floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the model. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Residual target for root finders.
    const SOLVE_TOL: f64;
    /// Default relative tolerance for the ODE integrator.
    const ODE_RTOL: f64;
    /// Relative step for central finite differences.
    const FD_STEP: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        self.max(lo).min(hi)
    }
}

impl Scalar for f64 {
    const SOLVE_TOL: f64 = 1e-13;
    const ODE_RTOL: f64 = 1e-10;
    const FD_STEP: f64 = 1e-6;
}

impl Scalar for f32 {
    const SOLVE_TOL: f64 = 2e-6;
    const ODE_RTOL: f64 = 1e-5;
    const FD_STEP: f64 = 3e-3;
}
