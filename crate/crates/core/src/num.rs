//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// All tolerances quoted in the documentation assume `f64`; `f32` builds
/// work but only reach single-precision accuracy.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        // every finite f64 has an f32/f64 image, possibly rounded
        Self::from_f64(x).unwrap()
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Linear interpolation of `y` over strictly increasing `x`, clamped to the end values.
pub(crate) fn interp_clamped<T: Real>(x: &[T], y: &[T], at: T) -> T {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let j = x.partition_point(|&v| v <= at);
    let (x0, x1) = (x[j - 1], x[j]);
    let w = (at - x0) / (x1 - x0);
    y[j - 1] + w * (y[j] - y[j - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interp_midpoint_and_clamp() {
        let x = [0.0, 1.0, 3.0];
        let y = [0.0, 2.0, 6.0];
        assert_eq!(interp_clamped(&x, &y, 0.5), 1.0);
        assert_eq!(interp_clamped(&x, &y, 2.0), 4.0);
        assert_eq!(interp_clamped(&x, &y, -1.0), 0.0);
        assert_eq!(interp_clamped(&x, &y, 9.0), 6.0);
    }

    #[test]
    fn lit_round_trips_for_both_widths() {
        assert_eq!(<f64 as Real>::lit(0.25), 0.25);
        assert_eq!(<f32 as Real>::lit(0.25), 0.25f32);
    }
}
