//! Floating-point scalar abstraction.
//!
//! All approximate numerics (root finding, star images, box covers) are
//! generic over [`Scalar`]; exact arithmetic stays on arbitrary-precision
//! integers and never touches this trait.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Nearest scalar to an arbitrary-precision integer.
    fn from_bigint(v: &BigInt) -> Self {
        Self::from_f64_lossy(v.to_f64().unwrap_or(f64::INFINITY))
    }

    /// Nearest scalar to `num/den`, computed through a rational to keep
    /// large numerators and denominators from overflowing separately.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        let r = BigRational::new(num.clone(), den.clone());
        Self::from_f64_lossy(r.to_f64().unwrap_or(f64::INFINITY))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ratio_conversion_handles_large_operands() {
        // 10^40 / (2 * 10^40) = 0.5 even though both sides overflow f64 range checks naively
        let num = BigInt::parse_bytes(b"10000000000000000000000000000000000000000", 10).unwrap();
        let den = &num * BigInt::from(2);
        let v = f64::from_ratio(&num, &den);
        assert_eq!(v, 0.5);
    }
}
