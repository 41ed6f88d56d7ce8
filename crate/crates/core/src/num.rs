//! Integer scalar abstraction shared by the constraint layer, the solver and
//! the MCS enumerator.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{FromPrimitive, PrimInt, Signed, ToPrimitive};

/// Signed machine integer usable as the value type of constraints.
pub trait Scalar:
    PrimInt + Signed + FromPrimitive + ToPrimitive + Debug + Display + Hash + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: PrimInt + Signed + FromPrimitive + ToPrimitive + Debug + Display + Hash + Default + Send + Sync + 'static
{
}

/// Converts a source-level literal into the scalar type.
pub fn from_i64<S: Scalar>(v: i64) -> Option<S> {
    S::from_i64(v)
}

/// Floor division. `b` must be nonzero.
pub fn div_floor<S: Scalar>(a: S, b: S) -> S {
    let q = a / b;
    if (a % b != S::zero()) && ((a < S::zero()) != (b < S::zero())) {
        q - S::one()
    } else {
        q
    }
}

/// Ceiling division. `b` must be nonzero.
pub fn div_ceil<S: Scalar>(a: S, b: S) -> S {
    let q = a / b;
    if (a % b != S::zero()) && ((a < S::zero()) == (b < S::zero())) {
        q + S::one()
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_ceil_match_float_rounding() {
        for a in -20i64..=20 {
            for b in [-7i64, -3, -1, 1, 2, 5] {
                let f = a as f64 / b as f64;
                assert_eq!(div_floor(a, b), f.floor() as i64, "{a}/{b}");
                assert_eq!(div_ceil(a, b), f.ceil() as i64, "{a}/{b}");
                assert_eq!(div_floor(a as i32, b as i32), f.floor() as i32);
            }
        }
    }
}
