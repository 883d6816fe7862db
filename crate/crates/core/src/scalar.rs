//! Scalar abstraction for the numeric core.
//!
//! Density, special-function and summary code is generic over [`Real`] so the
//! same formulas run in `f32` or `f64`. The sampling and fitting layers work
//! on the crate-level [`crate::Scalar`] alias (`f64`); the tight series
//! tolerances used there are only meaningful in double precision.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
    /// 2π, the circumference of the unit circle.
    fn tau() -> Self {
        Self::PI() + Self::PI()
    }

    /// Shorthand for lossy conversion of an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Lossy conversion of a machine integer.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    /// Relative tolerance at which infinite series are truncated.
    fn series_tol() -> Self;
}

impl Real for f64 {
    fn series_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn series_tol() -> Self {
        1e-6
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::tau();
    let mut r = x % tau;
    if r < T::zero() {
        r = r + tau;
    }
    // `x % tau` can round to tau itself for tiny negative inputs.
    if r >= tau {
        r = r - tau;
    }
    r
}

/// Numerically stable log(Σ exp(xs)).
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().cloned().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s = xs
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}
