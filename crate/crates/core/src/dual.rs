//! Dual numbers `a + θb` with `θ² = 0`.
//!
//! The nilpotent part carries the Jordan-cell partner of every quantity: a
//! conformal weight `Δ + θ`, a diffusivity `κ + τκ̂`, a map `h + τĥ`. Products
//! drop the `θ²` term, so in exact mode every identity below holds without
//! tolerance, and in float mode the slope is a forward-mode derivative.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{FloatScalar, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dual<T> {
    /// The θ⁰ part.
    pub body: T,
    /// The θ¹ part.
    pub slope: T,
}

impl<T> Dual<T> {
    pub const fn new(body: T, slope: T) -> Self {
        Dual { body, slope }
    }
}

impl<T: Scalar> Dual<T> {
    pub fn constant(body: T) -> Self {
        Dual::new(body, T::zero())
    }

    /// The nilpotent generator `0 + θ·1`.
    pub fn theta() -> Self {
        Dual::new(T::zero(), T::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Self::constant(T::from_i64(n))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::constant(T::from_ratio(p, q))
    }

    pub fn is_invertible(&self) -> bool {
        !self.body.is_zero()
    }

    /// `(a + θb)⁻¹ = 1/a − θ b/a²`.
    pub fn inv(&self) -> Result<Self> {
        if self.body.is_zero() {
            return Err(Error::NonInvertible);
        }
        let r = T::one() / self.body.clone();
        let slope = -(self.slope.clone() * r.clone() * r.clone());
        Ok(Dual::new(r, slope))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.inv()?)
    }

    pub fn scale(&self, k: &T) -> Self {
        Dual::new(self.body.clone() * k.clone(), self.slope.clone() * k.clone())
    }

    /// Integer power, `(a + θb)ⁿ = aⁿ + θ n aⁿ⁻¹ b`.
    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.inv()?.powi(-n);
        }
        if n == 0 {
            return Ok(Self::one());
        }
        let below = pow_body(&self.body, (n - 1) as u32);
        let body = below.clone() * self.body.clone();
        let slope = T::from_i64(n as i64) * below * self.slope.clone();
        Ok(Dual::new(body, slope))
    }
}

fn pow_body<T: Scalar>(x: &T, mut n: u32) -> T {
    let mut base = x.clone();
    let mut acc = T::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        n >>= 1;
    }
    acc
}

impl<T: FloatScalar> Dual<T> {
    fn check_log_domain(&self) -> Result<()> {
        if self.body.is_zero() {
            return Err(Error::Singular);
        }
        if self.body.on_branch_cut() {
            return Err(Error::Branch(format!("{:?}", self.body)));
        }
        Ok(())
    }

    /// `ln(a + θb) = ln a + θ b/a` on the principal branch.
    pub fn ln(&self) -> Result<Self> {
        self.check_log_domain()?;
        Ok(Dual::new(self.body.ln(), self.slope / self.body))
    }

    pub fn exp(&self) -> Self {
        let e = self.body.exp();
        Dual::new(e, self.slope * e)
    }

    /// `x^e = exp(e · ln x)`, exact in the nilpotent part.
    ///
    /// For a body-only base and exponent `Δ + θ` this is `x^Δ (1 + θ ln x)`.
    pub fn powd(&self, e: &Self) -> Result<Self> {
        if e.body.is_zero() && e.slope.is_zero() {
            return Ok(Self::one());
        }
        self.check_log_domain()?;
        let a = self.body;
        let body = a.pow(e.body);
        let slope = body * (e.body * self.slope / a + e.slope * a.ln());
        Ok(Dual::new(body, slope))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powd(&Dual::constant(T::from_f64(0.5)))
    }
}

/// Exact rational square root of a non-negative rational, if it exists.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(n.clone() * &n) == x.numer() && &(d.clone() * &d) == x.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Dual<BigRational> {
    /// `√(κ + θκ̂) = √κ + θ κ̂/(2√κ)` when `κ` is a positive perfect rational square.
    pub fn sqrt_exact(&self) -> Result<Self> {
        if !self.body.is_positive() {
            return Err(Error::NotPerfectSquare(self.body.to_string()));
        }
        let root = rational_sqrt(&self.body).ok_or_else(|| Error::NotPerfectSquare(self.body.to_string()))?;
        let two = BigRational::from_integer(BigInt::from(2));
        let slope = self.slope.clone() / (two * root.clone());
        Ok(Dual::new(root, slope))
    }

    pub fn to_f64(&self) -> Dual<f64> {
        use num_traits::ToPrimitive;
        Dual::new(self.body.to_f64().unwrap_or(f64::NAN), self.slope.to_f64().unwrap_or(f64::NAN))
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::new(T::zero(), T::zero())
    }
    fn is_zero(&self) -> bool {
        self.body.is_zero() && self.slope.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Dual::new(T::one(), T::zero())
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.body + rhs.body, self.slope + rhs.slope)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.body - rhs.body, self.slope - rhs.slope)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let slope = self.body.clone() * rhs.slope + self.slope * rhs.body.clone();
        Dual::new(self.body * rhs.body, slope)
    }
}

/// Panics on a zero-body divisor; use [`Dual::checked_div`] to get an error instead.
impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by non-invertible dual scalar")
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.body, -self.slope)
    }
}

impl<'a, T: Scalar> Add<&'a Dual<T>> for &'a Dual<T> {
    type Output = Dual<T>;
    fn add(self, rhs: &Dual<T>) -> Dual<T> {
        self.clone() + rhs.clone()
    }
}

impl<'a, T: Scalar> Sub<&'a Dual<T>> for &'a Dual<T> {
    type Output = Dual<T>;
    fn sub(self, rhs: &Dual<T>) -> Dual<T> {
        self.clone() - rhs.clone()
    }
}

impl<'a, T: Scalar> Mul<&'a Dual<T>> for &'a Dual<T> {
    type Output = Dual<T>;
    fn mul(self, rhs: &Dual<T>) -> Dual<T> {
        self.clone() * rhs.clone()
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = self.clone() + rhs;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = self.clone() - rhs;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = self.clone() * rhs;
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})θ", self.body, self.slope)
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::{DualC64, DualF64, DualQ};

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::from_ratio(p, d)
    }

    fn dq(b: (i64, i64), s: (i64, i64)) -> DualQ {
        Dual::new(q(b.0, b.1), q(s.0, s.1))
    }

    #[test]
    fn theta_squares_to_zero() {
        assert_eq!(DualQ::theta() * DualQ::theta(), DualQ::zero());
    }

    #[test]
    fn multiplication_examples() {
        let x = dq((7, 3), (-2, 5));
        assert_eq!(DualQ::one() * x.clone(), x);
        assert_eq!(dq((2, 1), (3, 1)) * dq((4, 1), (5, 1)), dq((8, 1), (22, 1)));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(dq((1, 1), (1, 1)).inv().unwrap(), dq((1, 1), (-1, 1)));
        assert_eq!(dq((2, 1), (0, 1)).inv().unwrap(), dq((1, 2), (0, 1)));
        assert_eq!(DualQ::theta().inv().unwrap_err(), Error::NonInvertible);
    }

    #[test]
    fn dual_exponent_power() {
        let a = 3.7_f64;
        let delta = 0.25;
        let x = DualF64::constant(a);
        let got = x.powd(&Dual::new(delta, 1.0)).unwrap();
        assert!((got.body - a.powf(delta)).abs() < 1e-14);
        assert!((got.slope - a.powf(delta) * a.ln()).abs() < 1e-14);
    }

    #[test]
    fn zeroth_power_is_one() {
        let x = DualF64::new(-2.0, 5.0);
        assert_eq!(x.powd(&DualF64::zero()).unwrap(), DualF64::one());
    }

    #[test]
    fn half_power_chain_rule() {
        let got = DualF64::new(4.0, 2.0).powd(&DualF64::constant(0.5)).unwrap();
        assert_eq!(got, DualF64::new(2.0, 0.5));
    }

    #[test]
    fn power_domain_errors() {
        let e = DualF64::constant(0.5);
        assert!(matches!(DualF64::new(-1.0, 0.0).powd(&e), Err(Error::Branch(_))));
        assert_eq!(DualF64::new(0.0, 1.0).powd(&e), Err(Error::Singular));
        assert!(matches!(DualC64::constant(Complex64::new(-1.0, 0.0)).ln(), Err(Error::Branch(_))));
        assert!(DualC64::constant(Complex64::new(-1.0, 1e-3)).ln().is_ok());
    }

    #[test]
    fn complex_power_slope() {
        let z = Complex64::new(0.3, 1.2);
        let e = Dual::new(Complex64::new(0.25, 0.0), Complex64::new(1.0, 0.0));
        let got = DualC64::constant(z).powd(&e).unwrap();
        let expected = z.powc(Complex64::new(0.25, 0.0));
        assert!((got.body - expected).norm() < 1e-14);
        assert!((got.slope - expected * z.ln()).norm() < 1e-14);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(dq((4, 1), (-16, 3)).sqrt_exact().unwrap(), dq((2, 1), (-4, 3)));
        assert_eq!(dq((9, 4), (1, 1)).sqrt_exact().unwrap(), dq((3, 2), (1, 3)));
        assert!(dq((3, 1), (0, 1)).sqrt_exact().is_err());
        assert!(dq((0, 1), (1, 1)).sqrt_exact().is_err());
        assert!(dq((-4, 1), (0, 1)).sqrt_exact().is_err());
    }

    #[test]
    fn integer_powers() {
        let x = dq((2, 1), (3, 1));
        assert_eq!(x.powi(3).unwrap(), x.clone() * x.clone() * x.clone());
        assert_eq!(x.powi(-2).unwrap(), (x.clone() * x.clone()).inv().unwrap());
        assert_eq!(x.powi(0).unwrap(), DualQ::one());
    }

    fn rational() -> impl Strategy<Value = BigRational> {
        (-1000i64..=1000, 1i64..=97).prop_map(|(a, b)| q(a, b))
    }

    fn dual_rational() -> impl Strategy<Value = DualQ> {
        (rational(), rational()).prop_map(|(a, b)| Dual::new(a, b))
    }

    // x ↦ x³ ln x / (1 + x²) + x^1.7
    fn smooth(x: DualF64) -> DualF64 {
        let cube = x.powi(3).unwrap();
        let num = cube * x.ln().unwrap();
        let den = DualF64::one() + x * x;
        num / den + x.powd(&DualF64::constant(1.7)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn ring_axioms_exact(x in dual_rational(), y in dual_rational(), z in dual_rational()) {
            prop_assert_eq!((&x * &y) * z.clone(), x.clone() * (&y * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(x.clone() * (&y + &z), &x * &y + &x * &z);
            prop_assert_eq!(&x * &DualQ::one(), x.clone());
            prop_assert_eq!(&x + &DualQ::zero(), x.clone());
        }

        #[test]
        fn inverse_is_two_sided(x in dual_rational()) {
            prop_assume!(x.is_invertible());
            let inv = x.inv().unwrap();
            prop_assert_eq!(&x * &inv, DualQ::one());
        }

        #[test]
        fn power_laws(a in 0.1f64..10.0, b in -3.0f64..3.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0) {
            let x = DualF64::new(a, b);
            let one = x.powd(&DualF64::one()).unwrap();
            prop_assert!((one.body - a).abs() <= 1e-12 * a.abs());
            prop_assert!((one.slope - b).abs() <= 1e-12 * (1.0 + b.abs()));
            let nested = x.powd(&DualF64::constant(e1)).unwrap().powd(&DualF64::constant(e2)).unwrap();
            let direct = x.powd(&DualF64::constant(e1 * e2)).unwrap();
            prop_assert!((nested.body - direct.body).abs() <= 1e-12 * direct.body.abs());
            prop_assert!((nested.slope - direct.slope).abs() <= 1e-12 * (direct.slope.abs() + direct.body.abs()));
        }

        #[test]
        fn slope_is_forward_derivative(a in 0.2f64..5.0) {
            let h = 1e-5;
            let fd = (smooth(DualF64::constant(a + h)).body - smooth(DualF64::constant(a - h)).body) / (2.0 * h);
            let ad = smooth(DualF64::new(a, 1.0)).slope;
            prop_assert!((ad - fd).abs() <= 1e-6 * ad.abs().max(1.0), "ad {} fd {}", ad, fd);
        }
    }
}
