//! Numeric abstraction shared by every solver.
//!
//! Rates, distortions and multipliers are all values of one [`Scalar`] type.
//! Floating types compare Lagrangian costs with a relative tie tolerance;
//! the rational type compares exactly, which makes singular multipliers
//! (ratios of table differences) representable without rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num
    + Signed
    + Copy
    + PartialOrd
    + Debug
    + Display
    + Sum
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance used by [`Scalar::ties`]. Zero for exact types.
    const TIE_EPS: f64;

    /// `true` when two Lagrangian costs are considered equal:
    /// `|a - b| <= eps * max(1, |a|)`.
    fn ties(a: Self, b: Self) -> bool;

    /// `true` when two multipliers are considered equal:
    /// `|a - b| <= eps * max(|a|, |b|)`. Unlike [`Scalar::ties`] there is
    /// no absolute floor, since multipliers can be arbitrarily small.
    fn same_multiplier(a: Self, b: Self) -> bool;

    fn is_finite(self) -> bool;

    /// Bit-level identity, stricter than `==` for floats (`0.0` vs `-0.0`).
    fn identical(self, other: Self) -> bool;

    /// Smallest integer `k` with `k * quantum >= self`, or `None` when the
    /// result does not fit or the input is not finite.
    fn grid_ceil(self, quantum: Self) -> Option<u64>;

    /// Largest integer `k` with `k * quantum <= self`.
    fn grid_floor(self, quantum: Self) -> Option<u64>;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::zero)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).unwrap_or_else(Self::zero)
    }

    fn half(self) -> Self {
        self / (Self::one() + Self::one())
    }

    /// A value strictly inside `(a, b)` for `a < b`, used when bisecting
    /// multipliers. Floats take the midpoint.
    fn between(a: Self, b: Self) -> Self {
        (a + b).half()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

// Quotients like 0.7 / 0.1 land a few ulps off an integer; snap those
// before rounding so that exact multiples of the quantum stay exact.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn to_grid(x: f64) -> Option<u64> {
    if x.is_finite() && x >= 0.0 && x <= u64::MAX as f64 {
        Some(x as u64)
    } else {
        None
    }
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            const TIE_EPS: f64 = $eps;

            #[inline]
            fn ties(a: Self, b: Self) -> bool {
                (a - b).abs() <= ($eps as $t) * a.abs().max(1.0)
            }

            #[inline]
            fn same_multiplier(a: Self, b: Self) -> bool {
                (a - b).abs() <= ($eps as $t) * a.abs().max(b.abs())
            }

            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }

            #[inline]
            fn identical(self, other: Self) -> bool {
                self.to_bits() == other.to_bits()
            }

            fn grid_ceil(self, quantum: Self) -> Option<u64> {
                to_grid(snap((self / quantum) as f64).ceil())
            }

            fn grid_floor(self, quantum: Self) -> Option<u64> {
                to_grid(snap((self / quantum) as f64).floor())
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

impl Scalar for Rational64 {
    const TIE_EPS: f64 = 0.0;

    #[inline]
    fn ties(a: Self, b: Self) -> bool {
        a == b
    }

    fn same_multiplier(a: Self, b: Self) -> bool {
        a == b
    }

    fn is_finite(self) -> bool {
        true
    }

    fn identical(self, other: Self) -> bool {
        self == other
    }

    fn grid_ceil(self, quantum: Self) -> Option<u64> {
        (self / quantum).ceil().to_integer().to_u64()
    }

    fn grid_floor(self, quantum: Self) -> Option<u64> {
        (self / quantum).floor().to_integer().to_u64()
    }

    // The simplest fraction in the interval keeps denominators small, so
    // repeated bisection cannot overflow the way exact midpoints would.
    fn between(a: Self, b: Self) -> Self {
        if a < Rational64::from_integer(0) || a >= b {
            return (a + b) / Rational64::from_integer(2);
        }
        simplest_between(a, Some(b))
    }

    // `Ratio::from_f64` goes through a continued-fraction approximation;
    // integers and dyadic fractions are the common inputs and convert exactly.
    fn from_f64_lossy(v: f64) -> Self {
        if v.fract() == 0.0 && v.abs() < i64::MAX as f64 {
            return Rational64::from_integer(v as i64);
        }
        Rational64::from_f64(v).unwrap_or_else(|| Rational64::from_integer(0))
    }
}

/// Simplest fraction in the open interval `(lo, hi)`, `0 <= lo < hi`,
/// with `hi = None` standing for infinity.
fn simplest_between(lo: Rational64, hi: Option<Rational64>) -> Rational64 {
    let n = lo.floor();
    let next = n + Rational64::from_integer(1);
    match hi {
        Some(h) if next >= h => {
            let inner_hi = (lo != n).then(|| (lo - n).recip());
            n + simplest_between((h - n).recip(), inner_hi).recip()
        }
        _ => next,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_ties_are_relative() {
        assert!(f64::ties(1e12, 1e12 + 1.0));
        assert!(!f64::ties(1.0, 1.0 + 1e-6));
        assert!(f64::ties(0.0, 1e-10));
    }

    #[test]
    fn multiplier_comparison_has_no_absolute_floor() {
        assert!(f64::ties(1e-9, 2e-9));
        assert!(!f64::same_multiplier(1e-9, 2e-9));
        assert!(f64::same_multiplier(1e-9, 1e-9 * (1.0 + 1e-12)));
        assert!(f64::same_multiplier(0.0, 0.0));
    }

    #[test]
    fn rational_ties_are_exact() {
        let a = Rational64::new(3, 2);
        assert!(Rational64::ties(a, Rational64::new(6, 4)));
        assert!(!Rational64::ties(a, Rational64::new(1_000_001, 666_667)));
    }

    #[test]
    fn grid_rounding_snaps_near_integers() {
        assert_eq!(0.7f64.grid_ceil(0.1), Some(7));
        assert_eq!(0.75f64.grid_ceil(0.1), Some(8));
        assert_eq!(0.75f64.grid_floor(0.1), Some(7));
        assert_eq!(5.0f64.grid_ceil(1.0), Some(5));
        assert_eq!(f64::NAN.grid_ceil(1.0), None);
        let r = Rational64::new(7, 3);
        assert_eq!(r.grid_ceil(Rational64::from_integer(1)), Some(3));
        assert_eq!(r.grid_floor(Rational64::from_integer(1)), Some(2));
    }

    #[test]
    fn rational_between_is_simple_and_inside() {
        let r = |n, d| Rational64::new(n, d);
        assert_eq!(Rational64::between(r(1, 1), r(4, 1)), r(2, 1));
        assert_eq!(Rational64::between(r(0, 1), r(1, 1)), r(1, 2));
        assert_eq!(Rational64::between(r(1, 3), r(1, 2)), r(2, 5));
        assert_eq!(Rational64::between(r(3, 2), r(2, 1)), r(5, 3));
        let (a, b) = (r(1_000_000, 3), r(1_000_001, 3));
        let m = Rational64::between(a, b);
        assert!(a < m && m < b);
        assert_eq!(f64::between(1.0, 2.0), 1.5);
    }

    #[test]
    fn identical_distinguishes_signed_zero() {
        assert!(!0.0f64.identical(-0.0));
        assert!(1.5f64.identical(1.5));
    }
}
