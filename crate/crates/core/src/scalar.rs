//! Scalar abstraction over the numeric carrier.

use std::fmt;

use num_traits::{Num, Signed, ToPrimitive};

/// Numeric carrier for probabilities, bids, values and payments.
///
/// The mechanisms only need field arithmetic plus ordering, so the whole
/// crate is generic over this trait. [`crate::Rat`] is the exact
/// instantiation; `f64` also satisfies the bounds for quick approximate runs
/// but gives up the exact tie and threshold semantics (and must not produce
/// NaN).
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + fmt::Debug + fmt::Display + ToPrimitive + 'static
{
    /// The scalar `numer / denom`. Panics if `denom` is zero.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// The scalar `n`.
    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for crate::Rat {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        crate::Rat::new(numer.into(), denom.into())
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }
}

/// Sum of an iterator of scalars.
pub fn sum<S: Scalar>(iter: impl IntoIterator<Item = S>) -> S {
    iter.into_iter().fold(S::zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn ratios() {
        assert_eq!(Rat::from_ratio(2, 4), Rat::from_ratio(1, 2));
        assert_eq!(Rat::from_ratio(-3, -6), Rat::from_ratio(1, 2));
        assert_eq!(f64::from_ratio(1, 4), 0.25);
        assert_eq!(Rat::from_int(7), Rat::from_ratio(7, 1));
    }
}
