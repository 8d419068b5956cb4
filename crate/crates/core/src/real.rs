//! Scalar abstraction and angle helpers shared by the geometry code.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar the geometry is generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Real>(angle: T) -> T {
    let tau = T::TAU();
    let mut a = angle % tau;
    if a < T::zero() {
        a = a + tau;
    }
    // -tiny + 2π can round up to exactly 2π
    if a >= tau {
        a = a - tau;
    }
    a
}

/// Counterclockwise sweep from `from` to `to`, in `[0, 2π)`.
pub fn ccw_delta<T: Real>(from: T, to: T) -> T {
    normalize_angle(to - from)
}

pub fn deg<T: Real>(radians: T) -> T {
    radians.to_degrees()
}

pub fn rad<T: Real>(degrees: T) -> T {
    degrees.to_radians()
}
