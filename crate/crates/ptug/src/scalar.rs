//! Scalar abstraction. Geometry, game dynamics, solvers, and oracles are
//! generic over one floating-point trait so the same code instantiates at
//! `f32` or `f64`; `f64` aliases live at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal. Panics only if the scalar type
    /// cannot represent ordinary finite constants, which none of the
    /// provided impls do.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant must convert")
    }

    /// Widening (or identity) conversion to `f64` for reporting.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Two-thirds and similar rational constants come up in closed-form radial
/// solutions; this keeps call sites short.
#[inline]
pub fn real<S: Real>(x: f64) -> S {
    S::of(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_roundtrip_is_exact_for_f64() {
        let x: f64 = real(0.062_5);
        assert_eq!(x, 0.0625);
    }

    #[test]
    fn f32_conversion_is_lossy_but_close() {
        let x: f32 = real(1.0 / 3.0);
        assert!((f64::from(x) - 1.0 / 3.0).abs() < 1e-7);
    }
}
