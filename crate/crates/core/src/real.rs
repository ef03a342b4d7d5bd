use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over: `f32` or `f64`.
///
/// Besides the usual float arithmetic this carries the complementary error
/// function (every Gaussian quantity reduces to it) and the per-precision
/// default tolerances used by the solvers.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default convergence tolerance for fixed-point and scalar solvers.
    const SOLVER_TOL: f64;
    /// Default absolute tolerance for adaptive quadrature.
    const QUAD_TOL: f64;
    /// Beyond this |alpha| the Mills ratio switches to its asymptotic series.
    const MILLS_CUTOFF: f64;

    fn erfc(self) -> Self;
}

impl Real for f64 {
    const SOLVER_TOL: f64 = 1e-10;
    const QUAD_TOL: f64 = 1e-10;
    const MILLS_CUTOFF: f64 = 37.0;

    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    const SOLVER_TOL: f64 = 1e-5;
    const QUAD_TOL: f64 = 1e-5;
    const MILLS_CUTOFF: f64 = 9.0;

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
