//! Scalar abstraction shared by the PHY and geometry code.
//!
//! Everything continuous is generic over [`Scalar`] so the same pipelines run
//! in `f32` or `f64`; the crate root pins [`crate::Real`] as the concrete type
//! the simulators and the CLI use.

use std::fmt;

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + rustfft::FftNum
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Convert a configuration/RNG value. Panics on non-finite input, which
    /// never occurs for validated configs.
    fn of(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).expect("f64 value representable as Scalar")
    }

    /// Widen to `f64` for statistics and CSV output.
    fn widen(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("Scalar value representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
