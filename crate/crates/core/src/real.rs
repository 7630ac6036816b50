use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type the pricing math is written against. Covers everything the
/// recursions, CDF algebra, and bisection need; implemented for `f32` and
/// `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + AddAssign + Sum + fmt::Debug + fmt::Display + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
