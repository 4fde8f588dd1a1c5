//! Scalar abstraction for the probability and bound computations.
//!
//! Every closed-form probability in the crate is a finite product or ratio of
//! integers, so it can be evaluated exactly with [`BigRational`] or
//! approximately with `f32`/`f64` through the same generic code path.

use std::fmt::Debug;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive {
    /// Builds `num / den` in this scalar type. `den` must be non-zero.
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self;

    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable in scalar")
    }

    fn approx_f64(&self) -> f64;
}

fn big_ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

impl Scalar for f64 {
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        big_ratio(num, den).to_f64().unwrap_or(f64::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        big_ratio(num, den).to_f32().unwrap_or(f32::NAN)
    }

    fn approx_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        big_ratio(num, den)
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_in_each_scalar() {
        let n = BigUint::from(1u32);
        let d = BigUint::from(8u32);
        assert_eq!(<f64 as Scalar>::from_ratio(&n, &d), 0.125);
        assert_eq!(<f32 as Scalar>::from_ratio(&n, &d), 0.125f32);
        assert_eq!(
            <BigRational as Scalar>::from_ratio(&n, &d),
            BigRational::new(1.into(), 8.into())
        );
    }

    #[test]
    fn huge_ratio_converts_to_float() {
        let n = BigUint::from(3u32).pow(700);
        let d = BigUint::from(3u32).pow(701);
        let v = <f64 as Scalar>::from_ratio(&n, &d);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }
}
