//! Base fields for dual arithmetic.
//!
//! [`Scalar`] is the ring-with-division contract shared by the exact
//! (`BigRational`) and floating (`f32`, `f64`, complex) fields.
//! [`FloatScalar`] adds the transcendental functions needed by dual powers
//! and the stochastic integrators.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

pub trait Scalar: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// Exact fields compare against zero without tolerance.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_i64(p) / Self::from_i64(q)
    }

    /// Absolute value (modulus) as an `f64`, used for pivoting and reporting.
    fn magnitude(&self) -> f64;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map_or(f64::INFINITY, f64::abs)
    }
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_i64(n: i64) -> Self {
                n as $t
            }

            fn magnitude(&self) -> f64 {
                self.abs() as f64
            }
        }

        impl Scalar for Complex<$t> {
            const EXACT: bool = false;

            fn from_i64(n: i64) -> Self {
                Complex::new(n as $t, 0.0)
            }

            fn magnitude(&self) -> f64 {
                self.norm() as f64
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);

/// Floating fields with logarithm, exponential and powers on the principal branch.
pub trait FloatScalar: Scalar + Copy {
    fn from_f64(x: f64) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    /// `self^e` on the principal branch.
    fn pow(self, e: Self) -> Self;
    /// True when the principal logarithm is not analytic at `self`
    /// (non-positive reals; the closed negative real axis for complex values).
    fn on_branch_cut(self) -> bool;
    fn re(self) -> f64;
    fn im(self) -> f64;
    /// Whether a Loewner step from `prev` to `next` crossed out of the domain
    /// (through the real singularity for real points, through the real axis
    /// for upper-half-plane points).
    fn left_domain(prev: Self, next: Self) -> bool;
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl FloatScalar for $t {
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn pow(self, e: Self) -> Self {
                self.powf(e)
            }
            fn on_branch_cut(self) -> bool {
                !(self > 0.0)
            }
            fn re(self) -> f64 {
                self as f64
            }
            fn im(self) -> f64 {
                0.0
            }
            fn left_domain(prev: Self, next: Self) -> bool {
                prev.signum() != next.signum() || next.is_zero()
            }
        }

        impl FloatScalar for Complex<$t> {
            fn from_f64(x: f64) -> Self {
                Complex::new(x as $t, 0.0)
            }
            fn ln(self) -> Self {
                Complex::ln(self)
            }
            fn exp(self) -> Self {
                Complex::exp(self)
            }
            fn pow(self, e: Self) -> Self {
                self.powc(e)
            }
            fn on_branch_cut(self) -> bool {
                self.im == 0.0 && !(self.re > 0.0)
            }
            fn re(self) -> f64 {
                self.re as f64
            }
            fn im(self) -> f64 {
                self.im as f64
            }
            fn left_domain(prev: Self, next: Self) -> bool {
                prev.im > 0.0 && !(next.im > 0.0)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);
