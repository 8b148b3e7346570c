//! Floating-point abstraction shared by the model, integrator, reproduction
//! and analytics code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real scalar the numerical core is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`, rounding if `Self` is narrower.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Default absolute tolerance below zero that is clamped back to zero
    /// after an integration step.
    fn default_clamp_tol() -> Self;
}

impl Scalar for f32 {
    fn default_clamp_tol() -> Self {
        // f32 rounding on tree totals of O(10^3) is O(10^-4)
        1e-3
    }
}

impl Scalar for f64 {
    fn default_clamp_tol() -> Self {
        1e-9
    }
}
